#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "impuritylab/common.hpp"

namespace impuritylab {

using FockWord = std::uint32_t;  // bit j-1 = occupation of site j

enum class ParitySector { full, even, odd };

// Jordan-Wigner string sign for a ladder operator at 1-based site j:
// (-1)^{number of occupied sites with index < j}. Every fermionic sign in
// the repository goes through this single routine.
inline int jw_sign(FockWord word, int site) {
  const FockWord mask = (FockWord{1} << (site - 1)) - 1;
  return (std::popcount(word & mask) & 1) ? -1 : 1;
}

// c_site |word>: returns false if the site is empty.
inline bool apply_annihilate(FockWord& word, int site, int& sign) {
  const FockWord bit = FockWord{1} << (site - 1);
  if (!(word & bit)) return false;
  sign *= jw_sign(word, site);
  word &= ~bit;
  return true;
}

// c^dag_site |word>: returns false if the site is occupied.
inline bool apply_create(FockWord& word, int site, int& sign) {
  const FockWord bit = FockWord{1} << (site - 1);
  if (word & bit) return false;
  sign *= jw_sign(word, site);
  word |= bit;
  return true;
}

class FockBasis {
 public:
  static constexpr int max_sites = 24;

  FockBasis(int L, ParitySector sector) : L_(L), sector_(sector) {
    if (L < 1) throw invalid_spec_error("FockBasis: L must be >= 1");
    if (L > max_sites) {
      const double bytes = std::ldexp(24.0, L);  // words + amplitudes
      throw resource_error("FockBasis: L = " + std::to_string(L) +
                           " exceeds the " + std::to_string(max_sites) +
                           "-site cap (would need about " +
                           std::to_string(bytes / (1024.0 * 1024.0 * 1024.0)) +
                           " GiB)");
    }
    const FockWord n = FockWord{1} << L;
    states_.reserve(sector == ParitySector::full ? n : n / 2);
    for (FockWord w = 0; w < n; ++w) {
      const bool odd = std::popcount(w) & 1;
      if (sector == ParitySector::full ||
          (sector == ParitySector::odd) == odd)
        states_.push_back(w);
    }
  }

  int sites() const { return L_; }
  ParitySector sector() const { return sector_; }
  std::size_t dim() const { return states_.size(); }
  FockWord word(std::size_t idx) const { return states_[idx]; }
  const std::vector<FockWord>& states() const { return states_; }

  std::size_t index(FockWord w) const {
    const auto it = std::lower_bound(states_.begin(), states_.end(), w);
    if (it == states_.end() || *it != w)
      throw sector_violation_error("FockBasis: word outside sector");
    return static_cast<std::size_t>(it - states_.begin());
  }

  bool contains(FockWord w) const {
    const auto it = std::lower_bound(states_.begin(), states_.end(), w);
    return it != states_.end() && *it == w;
  }

 private:
  int L_;
  ParitySector sector_;
  std::vector<FockWord> states_;  // ascending
};

}  // namespace impuritylab
