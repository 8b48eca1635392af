#include "orbitlab/bounds.hpp"

#include <stdexcept>

namespace orbitlab {

std::string to_string(Scope s) {
    switch (s) {
        case Scope::none: return "none";
        case Scope::generic_point: return "generic_point";
        case Scope::all_points: return "all_points";
    }
    return "?";
}

std::string to_string(Ambiguity a) {
    switch (a) {
        case Ambiguity::exact: return "exact";
        case Ambiguity::up_to_sign: return "up_to_sign";
        case Ambiguity::up_to_phase: return "up_to_phase";
    }
    return "?";
}

std::string to_string(VerdictClass c) {
    switch (c) {
        case VerdictClass::GL: return "gl";
        case VerdictClass::Aff: return "aff";
        case VerdictClass::O: return "o";
        case VerdictClass::U: return "u";
    }
    return "?";
}

VerdictClass verdict_class_from_string(const std::string& s) {
    if (s == "gl" || s == "GL") return VerdictClass::GL;
    if (s == "aff" || s == "Aff" || s == "AFF") return VerdictClass::Aff;
    if (s == "o" || s == "O") return VerdictClass::O;
    if (s == "u" || s == "U") return VerdictClass::U;
    throw std::invalid_argument("unknown transform class: " + s);
}

namespace {

Verdict finish(Verdict v, int K) {
    if (K > v.all_threshold) {
        v.scope = Scope::all_points;
        v.margin = K - v.all_threshold;
    } else if (K > v.generic_threshold) {
        v.scope = Scope::generic_point;
        v.margin = K - v.generic_threshold;
    } else {
        v.scope = Scope::none;
        v.margin = K - v.generic_threshold;
    }
    return v;
}

} // namespace

Verdict verdict_from_dims(int dim_v, int orbit_dim, int prior_dim, VerdictClass cls,
                          bool connected) {
    if (prior_dim < 0) throw std::invalid_argument("verdict_from_dims: prior_dim must be >= 0");
    if (cls == VerdictClass::U)
        throw std::invalid_argument("verdict_from_dims: use verdict_complex for the unitary class");
    Verdict v;
    v.dim_v = dim_v;
    v.orbit_dim = orbit_dim;
    v.effective = dim_v - orbit_dim;
    v.prior_dim = prior_dim;
    v.cls = cls;
    v.connected_orbits = connected;
    const int M = prior_dim;
    switch (cls) {
        case VerdictClass::GL:
            v.generic_threshold = M;
            v.all_threshold = 2 * M;
            v.ambiguity = Ambiguity::up_to_sign;
            break;
        case VerdictClass::Aff:
            v.generic_threshold = M;
            v.all_threshold = 2 * M;
            v.ambiguity = Ambiguity::exact;
            break;
        default:  // O
            v.generic_threshold = M + (connected ? 1 : 2);
            v.all_threshold = 2 * M + (connected ? 1 : 2);
            v.ambiguity = Ambiguity::up_to_sign;
            break;
    }
    return finish(v, v.effective);
}

Verdict verdict_real(const RepresentationSpec& spec, int prior_dim, VerdictClass cls,
                     bool connected) {
    const EffectiveDim ed = effective_dim(spec);
    return verdict_from_dims(ed.dim_v, ed.orbit_dim, prior_dim, cls, connected);
}

Verdict verdict_real(const RepresentationSpec& spec, int prior_dim, VerdictClass cls) {
    return verdict_real(spec, prior_dim, cls, orbits_connected(spec));
}

Verdict verdict_complex(const RepresentationSpec& spec, int prior_dim, VerdictClass cls) {
    if (prior_dim < 0) throw std::invalid_argument("verdict_complex: prior_dim must be >= 0");
    if (cls == VerdictClass::O)
        throw std::invalid_argument("verdict_complex: use verdict_real for the orthogonal class");
    spec.validate();
    long long dim_r = 0, k = 0;
    for (const auto& b : spec.blocks) {
        dim_r += 2ll * b.irrep_dim * b.multiplicity;
        k += unitary_group_dim(b.irrep_dim) - unitary_group_dim(b.irrep_dim - b.multiplicity);
    }
    const int K = static_cast<int>(dim_r - k);
    Verdict v;
    v.dim_v = static_cast<int>(dim_r);
    v.orbit_dim = static_cast<int>(k);
    v.effective = K;
    v.prior_dim = prior_dim;
    v.cls = cls;
    v.connected_orbits = true;  // products of unitary groups are connected
    const int M = prior_dim;
    switch (cls) {
        case VerdictClass::GL:
            v.generic_threshold = M;
            v.all_threshold = 2 * M;
            v.ambiguity = Ambiguity::up_to_phase;
            break;
        case VerdictClass::Aff:
            v.generic_threshold = M + 1;
            v.all_threshold = 2 * M + 1;
            v.ambiguity = Ambiguity::exact;
            break;
        default:  // U, connected improvement applies
            v.generic_threshold = M + 2;
            v.all_threshold = 2 * M + 2;
            v.ambiguity = Ambiguity::up_to_phase;
            break;
    }
    return finish(v, K);
}

Verdict verdict_phase_retrieval(int N, int prior_dim, VerdictClass cls) {
    if (N < 2) throw std::invalid_argument("verdict_phase_retrieval: N must be >= 2");
    if (prior_dim < 0) throw std::invalid_argument("verdict_phase_retrieval: prior_dim must be >= 0");
    if (cls == VerdictClass::U)
        throw std::invalid_argument("verdict_phase_retrieval: real classes only");
    const EffectiveDim ed = effective_dim(dihedral_decomposition(N));
    Verdict v;
    v.dim_v = ed.dim_v;
    v.orbit_dim = ed.orbit_dim;
    v.effective = ed.effective;
    v.prior_dim = prior_dim;
    v.cls = cls;
    v.connected_orbits = false;  // the one-dimensional summands disconnect the orbits
    v.ambiguity = cls == VerdictClass::Aff ? Ambiguity::exact : Ambiguity::up_to_sign;
    const int M = prior_dim;
    // inequalities as printed: N >= 2M / 4M, with +4 for the orthogonal class.
    // Encoded via thresholds on N with strict > of (bound - 1).
    const int off = cls == VerdictClass::O ? 4 : 0;
    v.generic_threshold = 2 * M + off - 1;
    v.all_threshold = 4 * M + off - 1;
    Verdict out = v;
    if (N > v.all_threshold) {
        out.scope = Scope::all_points;
        out.margin = N - (4 * M + off);
    } else if (N > v.generic_threshold) {
        out.scope = Scope::generic_point;
        out.margin = N - (2 * M + off);
    } else {
        out.scope = Scope::none;
        out.margin = N - (2 * M + off);
    }
    return out;
}

CryoemVerdict verdict_cryoem(int bandlimit, int radial_samples, int prior_dim, VerdictClass cls) {
    const RepresentationSpec spec = cryoem_spec(bandlimit, radial_samples);
    CryoemVerdict out;
    const long long L = bandlimit, R = radial_samples;
    // (L+1)(R(L+1) - L(4L+5)/6); the orbit-dimension term L(L+1)(4L+5)/6 is integral
    out.closed_form_k = (L + 1) * R * (L + 1) - L * (L + 1) * (4 * L + 5) / 6;
    out.closed_form = radial_samples >= 2 * bandlimit + 1;
    out.verdict = verdict_real(spec, prior_dim, cls, orbits_connected(spec));
    return out;
}

Verdict verdict_gram(int N, int R, int prior_dim, VerdictClass cls) {
    if (N < 1 || R < 1) throw std::invalid_argument("verdict_gram: N and R must be >= 1");
    const RepresentationSpec spec{{{N, R}}};
    return verdict_real(spec, prior_dim, cls, orbits_connected(spec));
}

RowsortVerdict verdict_rowsort(int d, int n, int prior_dim) {
    if (d < 1 || n < 1) throw std::invalid_argument("verdict_rowsort: d and n must be >= 1");
    if (prior_dim < 0) throw std::invalid_argument("verdict_rowsort: prior_dim must be >= 0");
    RowsortVerdict v;
    v.ambient = n * d;
    v.prior_dim = prior_dim;
    v.separating_all = 2 * prior_dim < n * d;
    v.separating_generic = prior_dim < n * d;
    return v;
}

} // namespace orbitlab
