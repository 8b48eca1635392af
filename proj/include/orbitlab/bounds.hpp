#pragma once

#include <string>

#include "orbitlab/repr.hpp"

namespace orbitlab {

enum class Scope { none, generic_point, all_points };
enum class Ambiguity { exact, up_to_sign, up_to_phase };

std::string to_string(Scope s);
std::string to_string(Ambiguity a);

enum class VerdictClass { GL, Aff, O, U };

std::string to_string(VerdictClass c);
VerdictClass verdict_class_from_string(const std::string& s);

/**
 * Recoverability prediction. `margin` is K minus the threshold of the
 * strongest inequality that held (for scope none, K minus the generic-point
 * threshold, so it is never positive there).
 */
struct Verdict {
    Scope scope = Scope::none;
    Ambiguity ambiguity = Ambiguity::exact;
    int margin = 0;
    bool connected_orbits = false;
    // context, carried for reports
    int dim_v = 0;
    int orbit_dim = 0;
    int effective = 0;   // K
    int prior_dim = 0;   // M
    VerdictClass cls = VerdictClass::GL;
    int generic_threshold = 0;  // generic scope requires K > this
    int all_threshold = 0;      // all-points scope requires K > this
};

/// Real thresholds applied to precomputed dimensions (for ambiguity groups
/// that are not products of orthogonal factors, e.g. finite rotation groups).
Verdict verdict_from_dims(int dim_v, int orbit_dim, int prior_dim, VerdictClass cls,
                          bool connected);

/// Real transversality thresholds. GL/Aff: generic K > M, all K > 2M.
/// O: generic K > M+2, all K > 2M+2, each lowered by one for connected orbits.
Verdict verdict_real(const RepresentationSpec& spec, int prior_dim, VerdictClass cls,
                     bool connected);

/// Same, with connectedness computed from the spec.
Verdict verdict_real(const RepresentationSpec& spec, int prior_dim, VerdictClass cls);

/// Complex/unitary thresholds with K = 2 sum N_l R_l - sum (dim U(N_l) -
/// dim U(N_l - R_l)). The product-of-unitary ambiguity group is connected,
/// so the U-class uses the improved K > M+2 / K > 2M+2 bounds.
Verdict verdict_complex(const RepresentationSpec& spec, int prior_dim, VerdictClass cls);

/// Phase retrieval inequalities, encoded as printed: GL/Aff generic N >= 2M,
/// all N >= 4M; O generic N >= 2M+4, all N >= 4M+4.
Verdict verdict_phase_retrieval(int N, int prior_dim, VerdictClass cls);

struct CryoemVerdict {
    Verdict verdict;
    bool closed_form = true;     // false when R < 2L+1 and the raw spec was used
    long long closed_form_k = 0; // K from the (L+1)(R(L+1) - L(4L+5)/6) formula
};

/// Bandlimited SO(3) coefficient model. Requires R >= 2L+1 for the closed
/// formula; otherwise falls back to effective_dim on the raw spec and says so.
CryoemVerdict verdict_cryoem(int bandlimit, int radial_samples, int prior_dim, VerdictClass cls);

/// Gram factoring: verdict_real on the single block (N, R).
Verdict verdict_gram(int N, int R, int prior_dim, VerdictClass cls);

struct RowsortVerdict {
    bool separating_all = false;      // M < nd/2
    bool separating_generic = false;  // M < nd
    int ambient = 0;                  // nd = K (the ambiguity group is finite)
    int prior_dim = 0;
};

/// Rowsort separation: the ambiguity group (S_n)^d is finite, so K = nd and
/// the affine thresholds give M < nd/2 (all points) and M < nd (generic).
RowsortVerdict verdict_rowsort(int d, int n, int prior_dim);

} // namespace orbitlab
