#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace impuritylab {

using complexd = std::complex<double>;
inline constexpr complexd imag_i{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// Exceptions map onto CLI exit codes: invalid_spec -> 2, resource -> 3,
// numerical contract violations -> 4.
struct invalid_spec_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct corrupted_state_error : numeric_error {
  using numeric_error::numeric_error;
};
struct unsupported_hamiltonian_error : invalid_spec_error {
  using invalid_spec_error::invalid_spec_error;
};
struct insufficient_data_error : invalid_spec_error {
  using invalid_spec_error::invalid_spec_error;
};
struct sector_violation_error : invalid_spec_error {
  using invalid_spec_error::invalid_spec_error;
};

// splitmix64, used to derive independent per-trajectory RNG streams from
// (master_seed, trajectory_index) so results do not depend on worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 1));
}

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stderr_;
};

}  // namespace impuritylab
