#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "dedup/chunking.hpp"
#include "dedup/source_model.hpp"

namespace dedup {

// All logarithms here are base two; the lone exp() in the B > A^2
// variable-length bound is the natural exponential, as written in the
// source expressions.

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

constexpr double kInfiniteBound = std::numeric_limits<double>::infinity();

inline void check_bound_domain(double A, double B, double EL) {
    if (!(A >= 2.0) || !(B >= 1.0) || !(EL >= 1.0))
        throw std::invalid_argument("bound domain: need A >= 2, B >= 1, E(L) >= 1");
}

/// Lower bound on R* for constant symbol length:
/// 0.5(L-1)min{A,B} + 0.5(B-A)^+ log(A/2).
inline double rstar_lower_fixed(double A, double B, double L) {
    check_bound_domain(A, B, L);
    return 0.5 * (L - 1.0) * std::min(A, B) + 0.5 * positive_part(B - A) * std::log2(A / 2.0);
}

/// Lower bound on R* for variable symbol length:
/// (0.5(E(L)-1)min{A,B} + 0.5(B-A)^+ log(A/2) - B(1+log E(L)))^+.
inline double rstar_lower_variable(double A, double B, double EL) {
    check_bound_domain(A, B, EL);
    return positive_part(0.5 * (EL - 1.0) * std::min(A, B) +
                         0.5 * positive_part(B - A) * std::log2(A / 2.0) -
                         B * (1.0 + std::log2(EL)));
}

/// Upper bound on R*: A(H(P_L) + L_max) + B log(A) + 1. For the
/// two-point (L, L+1) distribution this is the A(L+2) + B log(A) + 1
/// form; other supports are handled through H(P_L) and the maximum
/// length.
inline double rstar_upper(double A, double B, const LengthDistribution& lengths) {
    if (!(A >= 1.0) || !(B >= 0.0)) throw std::invalid_argument("rstar_upper: bad domain");
    return A * (lengths.entropy() + lengths.max_length()) + B * std::log2(A) + 1.0;
}

/// Fixed-length gap bound R_FL - R* <= 2 log(BL) + 3 + 3B.
inline double fl_gap_upper(double B, double L) {
    return 2.0 * std::log2(B * L) + 3.0 + 3.0 * B;
}

/// Ratio bound of the fixed-length theorem:
/// 1 + 7(B + log L) / (min{A,B}(L-1) + (B-A)^+ log(A/2)).
inline double thm1_ratio_bound(double A, double B, double L) {
    check_bound_domain(A, B, L);
    double den = std::min(A, B) * (L - 1.0) + positive_part(B - A) * std::log2(A / 2.0);
    if (!(den > 0.0)) return kInfiniteBound;
    return 1.0 + 7.0 * (B + std::log2(L)) / den;
}

/// Variable-length gap bound at anchor length M:
/// 2log(B E(L)) + 3 + B(4 + 2^(1-M) E(L) + log E(L)) + B 2^(M+2)
///   + B(1 + 2^(-M) E(L)) log(2B E(L)).
inline double vl_gap_upper(double A, double B, double EL, std::uint32_t M) {
    check_bound_domain(A, B, EL);
    if (M == 0) throw std::invalid_argument("vl_gap_upper: M must be positive");
    double t = std::exp2(-static_cast<double>(M)) * EL;
    return 2.0 * std::log2(B * EL) + 3.0 + B * (4.0 + 2.0 * t + std::log2(EL)) +
           B * std::exp2(static_cast<double>(M) + 2.0) +
           B * (1.0 + t) * std::log2(2.0 * B * EL);
}

/// Variable-length gap bound specialized to B > A^2:
/// the B 2^(M+2) boundary term becomes A^2 2^(M+2) plus the
/// no-anchor-in-a-symbol correction 2AB E(L) exp(-2^(-M-1) floor(E(L)/(2M+2))).
inline double vl_gap_upper_largeB(double A, double B, double EL, std::uint32_t M) {
    check_bound_domain(A, B, EL);
    if (M == 0) throw std::invalid_argument("vl_gap_upper_largeB: M must be positive");
    double t = std::exp2(-static_cast<double>(M)) * EL;
    double miss = std::exp(-std::exp2(-static_cast<double>(M) - 1.0) *
                           std::floor(EL / (2.0 * M + 2.0)));
    return 2.0 * std::log2(B * EL) + 3.0 + B * (4.0 + 2.0 * t + std::log2(EL)) +
           B * (1.0 + t) * std::log2(2.0 * B * EL) +
           A * A * std::exp2(static_cast<double>(M) + 2.0) + 2.0 * A * B * EL * miss;
}

/// Ratio bound of the variable-length theorem:
/// 1 + 4B(1+sqrt(E(L))) log(B E(L))
///       / (min{A,B}(E(L)-1) + (B-A)^+ log(A/2) - 2B log(2E(L)))^+.
inline double thm2_ratio_bound(double A, double B, double EL) {
    check_bound_domain(A, B, EL);
    double den = positive_part(std::min(A, B) * (EL - 1.0) +
                               positive_part(B - A) * std::log2(A / 2.0) -
                               2.0 * B * std::log2(2.0 * EL));
    if (!(den > 0.0)) return kInfiniteBound;
    return 1.0 + 4.0 * B * (1.0 + std::sqrt(EL)) * std::log2(B * EL) / den;
}

/// Default analytic anchor length ceil(0.5 log E(L)) for the
/// variable-length scheme, clamped to at least 1.
inline std::uint32_t optimize_m_vl(double EL) {
    if (!(EL >= 1.0)) throw std::invalid_argument("optimize_m_vl: E(L) >= 1 required");
    double m = std::ceil(0.5 * std::log2(EL));
    return m < 1.0 ? 1u : static_cast<std::uint32_t>(m);
}

/// Exhaustive argmin of vl_gap_upper over M in 1..ceil(log2(2B E(L))).
inline std::uint32_t optimize_m_vl_numeric(double A, double B, double EL) {
    check_bound_domain(A, B, EL);
    std::uint32_t hi = static_cast<std::uint32_t>(std::ceil(std::log2(2.0 * B * EL)));
    if (hi < 1) hi = 1;
    std::uint32_t best = 1;
    double best_gap = vl_gap_upper(A, B, EL, 1);
    for (std::uint32_t m = 2; m <= hi; ++m) {
        double g = vl_gap_upper(A, B, EL, m);
        if (g < best_gap) {
            best_gap = g;
            best = m;
        }
    }
    return best;
}

/// Anchor-length side condition of the multi-chunk analysis:
/// log(2B E(L)) <= 2^(M-1).
inline bool mc_anchor_condition_ok(double B, double EL, std::uint32_t M) {
    return std::log2(2.0 * B * EL) <= std::exp2(static_cast<double>(M) - 1.0);
}

/// Multi-chunk gap bound at anchor length M:
/// 5 + 2log(B E(L)) + B(25 + log B + 4 log E(L) + 2^(M+3))
///   + 48 A^2 B E(L)^3 2^(-2^(M-2)).
inline double mc_gap_upper(double A, double B, double EL, std::uint32_t M) {
    check_bound_domain(A, B, EL);
    if (M == 0) throw std::invalid_argument("mc_gap_upper: M must be positive");
    double tail_exp = std::exp2(static_cast<double>(M) - 2.0);
    double tail = 48.0 * A * A * B * EL * EL * EL * std::exp2(-tail_exp);
    return 5.0 + 2.0 * std::log2(B * EL) +
           B * (25.0 + std::log2(B) + 4.0 * std::log2(EL) +
                std::exp2(static_cast<double>(M) + 3.0)) +
           tail;
}

/// Analytic multi-chunk anchor length. When A^4 E(L)^5 >= 2B the
/// choice is ceil(log log(A^2 E(L)^3) + 2), otherwise
/// ceil(log log(2B E(L)) + 1). Compared in log space to dodge
/// overflow.
inline std::uint32_t optimize_m_mc(double A, double B, double EL) {
    check_bound_domain(A, B, EL);
    double lhs_log = 4.0 * std::log2(A) + 5.0 * std::log2(EL);
    double rhs_log = 1.0 + std::log2(B);
    double m;
    if (lhs_log >= rhs_log)
        m = std::ceil(std::log2(2.0 * std::log2(A) + 3.0 * std::log2(EL)) + 2.0);
    else
        m = std::ceil(std::log2(1.0 + std::log2(B * EL)) + 1.0);
    return m < 1.0 ? 1u : static_cast<std::uint32_t>(m);
}

/// Argmin of mc_gap_upper over M satisfying the anchor condition.
inline std::uint32_t optimize_m_mc_numeric(double A, double B, double EL) {
    check_bound_domain(A, B, EL);
    std::uint32_t best = 0;
    double best_gap = kInfiniteBound;
    for (std::uint32_t m = 1; m <= 62; ++m) {
        if (!mc_anchor_condition_ok(B, EL, m)) continue;
        double g = mc_gap_upper(A, B, EL, m);
        if (g < best_gap) {
            best_gap = g;
            best = m;
        }
    }
    if (best == 0) throw std::invalid_argument("optimize_m_mc_numeric: no feasible M");
    return best;
}

/// Ratio bound of the multi-chunk theorem with the explicit constants:
/// numerator B(73 + 128 log A + log B + 196 log E(L)) when
/// A^4 E(L)^5 >= 2B, else B(105 + 33 log B + 36 log E(L)), each plus
/// 5 + 2 log(B E(L)); denominator rstar_lower_variable.
inline double thm3_ratio_bound(double A, double B, double EL) {
    check_bound_domain(A, B, EL);
    double lhs_log = 4.0 * std::log2(A) + 5.0 * std::log2(EL);
    double rhs_log = 1.0 + std::log2(B);
    double gap = 5.0 + 2.0 * std::log2(B * EL);
    if (lhs_log >= rhs_log)
        gap += B * (73.0 + 128.0 * std::log2(A) + std::log2(B) + 196.0 * std::log2(EL));
    else
        gap += B * (105.0 + 33.0 * std::log2(B) + 36.0 * std::log2(EL));
    double den = rstar_lower_variable(A, B, EL);
    if (!(den > 0.0)) return kInfiniteBound;
    return 1.0 + gap / den;
}

/// Closed-form bound evaluations for one parameter point.
struct BoundReport {
    Scheme scheme = Scheme::FixedLength;
    double A = 0, B = 0, EL = 0;
    bool length_constant = false;
    bool in_regime = false;       // 2 <= A <= 2^(E(L)/2 - 1)
    std::uint32_t m_used = 0;     // anchor length (0 for FL)
    bool m_numeric = false;
    bool mc_condition_ok = true;  // anchor condition held at m_used
    double rstar_lower = 0;       // theorem-denominator form
    double rstar_upper = 0;       // explicit-upper form
    double scheme_gap_upper = 0;  // R_scheme - R* upper bound at m_used
    double ratio_upper = 0;       // theorem ratio bound
    double ratio_at_m = 0;        // 1 + gap(m_used)/rstar_lower
};

inline BoundReport evaluate_bounds(Scheme scheme, double A, double B,
                                   const LengthDistribution& lengths, bool numeric_m = false,
                                   std::uint32_t m_override = 0) {
    BoundReport r;
    r.scheme = scheme;
    r.A = A;
    r.B = B;
    r.EL = lengths.mean();
    r.length_constant = lengths.is_constant();
    r.in_regime = A >= 2.0 && std::log2(A) <= r.EL / 2.0 - 1.0 && lengths.is_concentrated();
    r.rstar_upper = rstar_upper(A, B, lengths);
    r.rstar_lower = r.length_constant ? rstar_lower_fixed(A, B, r.EL)
                                      : rstar_lower_variable(A, B, r.EL);
    r.m_numeric = numeric_m;
    switch (scheme) {
        case Scheme::FixedLength:
            r.m_used = 0;
            r.scheme_gap_upper = fl_gap_upper(B, r.EL);
            r.ratio_upper = thm1_ratio_bound(A, B, r.EL);
            break;
        case Scheme::VariableLength:
            r.m_used = m_override ? m_override
                                  : (numeric_m ? optimize_m_vl_numeric(A, B, r.EL)
                                               : optimize_m_vl(r.EL));
            r.scheme_gap_upper = vl_gap_upper(A, B, r.EL, r.m_used);
            r.ratio_upper = thm2_ratio_bound(A, B, r.EL);
            break;
        case Scheme::MultiChunk:
            r.m_used = m_override ? m_override
                                  : (numeric_m ? optimize_m_mc_numeric(A, B, r.EL)
                                               : optimize_m_mc(A, B, r.EL));
            r.mc_condition_ok = mc_anchor_condition_ok(B, r.EL, r.m_used);
            r.scheme_gap_upper = mc_gap_upper(A, B, r.EL, r.m_used);
            r.ratio_upper = thm3_ratio_bound(A, B, r.EL);
            break;
    }
    double lower_for_ratio = rstar_lower_variable(A, B, r.EL);
    r.ratio_at_m = lower_for_ratio > 0.0 ? 1.0 + r.scheme_gap_upper / lower_for_ratio
                                         : kInfiniteBound;
    if (scheme == Scheme::FixedLength)
        r.ratio_at_m = r.rstar_lower > 0.0 ? 1.0 + r.scheme_gap_upper / r.rstar_lower
                                           : kInfiniteBound;
    return r;
}

} // namespace dedup
