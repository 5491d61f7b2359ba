#pragma once

namespace arcas {

// All numeric thresholds live here so the acceptance suite and the library
// agree on them by construction.

// consistency of a loaded system: ||A x_ls - b|| <= eps * max(1, ||b||)
inline constexpr double kEpsConsist = 1e-8;

// numerical rank: keep singular values sigma_i > kEpsRank * sigma_max
inline constexpr double kEpsRank = 1e-10;

// chi flag: |w^T M y| / (||M^T w|| ||y||) > kEpsChi means "not orthogonal"
inline constexpr double kEpsChi = 1e-12;

// subspace membership: residual of y after projection onto the basis,
// relative to ||y||
inline constexpr double kEpsSub = 1e-10;

// rate / determinant comparisons in acceptance checks
inline constexpr double kEpsRate = 1e-8;

// absolute noise floor, scaled by (1 + ||y_0||): near convergence the iterate
// error carries ~1e-14 absolute rounding noise, so orthogonality and
// containment tests are mixed relative/absolute
inline constexpr double kAbsNoiseFloor = 1e-12;

// generated systems must satisfy ||A x* - b|| <= this * max(1, ||b||)
inline constexpr double kGenConsistTol = 1e-12;

// segments whose entry error is below kQuietFloor * (1 + ||y_0||) carry no
// resolvable span geometry (the error is accumulated roundoff) and are
// treated like zero starts by the stopping-time detector; iterate roundoff
// reaches ~1e-14 of the problem scale, so the span assertions need the entry
// error a few decades above that
inline constexpr double kQuietFloor = 1e-7;

// span-equality assertions at a declared stopping time compare unit vectors
// and tolerate this much remainder; decision thresholds stay at kEpsSub
inline constexpr double kLemmaSlack = 1e-6;

// two unit directions with |cos| >= 1 - kColinear count as the same direction
inline constexpr double kColinear = 1e-8;

// subset enumeration (worst-case rate, Meany checks) refuses above this many
// candidate directions: C(12,6) = 924 subsets is fine, 2^20 is not
inline constexpr int kEnumerationCap = 16;

}  // namespace arcas
