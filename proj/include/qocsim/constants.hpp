#pragma once

namespace qocsim {

// CODATA 2018 exact values
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s

// e^2 / (2 h), in GHz per farad: E_C[GHz] = kEc2OverH / C[F]
// for a single isolated island with self-capacitance C.
inline constexpr double kEsqOver2h =
    kElementaryCharge * kElementaryCharge / (2.0 * kPlanck) * 1e-9;  // GHz * F

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace qocsim
