#pragma once

// CODATA 2018 physical constants, SI units.
namespace rydex::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double c0 = 299792458.0;            // speed of light [m/s]
inline constexpr double h_planck = 6.62607015e-34;   // Planck constant [J s]
inline constexpr double hbar = 1.054571817e-34;      // reduced Planck constant [J s]
inline constexpr double k_boltzmann = 1.380649e-23;  // Boltzmann constant [J/K]
inline constexpr double q_e = 1.602176634e-19;       // elementary charge [C]
inline constexpr double eps0 = 8.8541878128e-12;     // vacuum permittivity [F/m]
inline constexpr double eta0 = 376.730313668;        // vacuum wave impedance [Ohm]

inline constexpr double bohr_radius = 5.29177210903e-11;  // [m]
inline constexpr double debye = 3.33564e-30;              // [C m]

}  // namespace rydex::constants
