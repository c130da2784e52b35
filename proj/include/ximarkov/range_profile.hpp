#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ximarkov/error.hpp"

namespace ximarkov {

/// One atom of a distribution function F, seen through its probability scale:
/// F(x-) = lo and F(x) = hi, so the atom occupies (lo, hi] on (0,1).
struct Atom {
  double lo;
  double hi;

  double mass() const { return hi - lo; }
};

/// t -> F o F^{-1}(t) and t -> F^- o F^{-1}(t) on (0,1).
///
/// Only the atoms of F matter: off the atoms both maps are the identity, on an
/// atom (lo, hi] the right-continuous map is hi and the left-continuous map is lo.
/// A profile without atoms is the identity (continuous F).
class RangeProfile {
 public:
  RangeProfile() = default;

  static RangeProfile identity() { return RangeProfile{}; }

  /// Degenerate F: a single atom carrying all mass.
  static RangeProfile dirac() { return from_atoms({Atom{0.0, 1.0}}); }

  /// Purely discrete F with the given atom masses in increasing support order.
  static RangeProfile discrete(std::span<const double> masses) {
    require(!masses.empty(), ErrorKind::InvalidParameter, "discrete profile needs at least one atom");
    double total = 0.0;
    for (double m : masses) {
      require(m > 0.0 && std::isfinite(m), ErrorKind::InvalidParameter, "atom masses must be positive");
      total += m;
    }
    require(std::abs(total - 1.0) < 1e-9, ErrorKind::InvalidParameter, "atom masses must sum to one");
    std::vector<Atom> atoms;
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      const double next = i + 1 == masses.size() ? 1.0 : acc + masses[i];
      atoms.push_back({acc, next});
      acc = next;
    }
    return from_atoms(std::move(atoms));
  }

  /// Mixed F given by its atoms on the probability scale; gaps are continuous parts.
  static RangeProfile from_atoms(std::vector<Atom> atoms) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& a = atoms[i];
      require(a.lo >= 0.0 && a.hi <= 1.0 && a.lo < a.hi, ErrorKind::InvalidParameter,
              "atom must satisfy 0 <= lo < hi <= 1");
      if (i > 0) require(atoms[i - 1].hi <= a.lo, ErrorKind::InvalidParameter, "atoms must not overlap");
    }
    RangeProfile p;
    p.atoms_ = std::move(atoms);
    return p;
  }

  /// Range profile of an empirical sample (atoms at tied values).
  static RangeProfile empirical(std::span<const double> sample) {
    require(!sample.empty(), ErrorKind::InvalidParameter, "empirical profile needs data");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    std::vector<double> masses;
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size();) {
      std::size_t j = i;
      while (j < s.size() && s[j] == s[i]) ++j;
      masses.push_back((j - i) / n);
      i = j;
    }
    return discrete(masses);
  }

  bool is_identity() const { return atoms_.empty(); }
  bool is_single_atom() const { return atoms_.size() == 1 && atoms_[0].lo == 0.0 && atoms_[0].hi == 1.0; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// F o F^{-1}(t).
  double upper(double t) const {
    const Atom* a = find(t);
    return a ? a->hi : t;
  }

  /// F^- o F^{-1}(t).
  double lower(double t) const {
    const Atom* a = find(t);
    return a ? a->lo : t;
  }

  /// Maximal sub-intervals of (0,1) on which both maps are the identity.
  std::vector<std::pair<double, double>> continuous_parts() const {
    std::vector<std::pair<double, double>> parts;
    double cursor = 0.0;
    for (const auto& a : atoms_) {
      if (a.lo > cursor) parts.emplace_back(cursor, a.lo);
      cursor = a.hi;
    }
    if (cursor < 1.0) parts.emplace_back(cursor, 1.0);
    return parts;
  }

 private:
  const Atom* find(double t) const {
    // atoms are half-open (lo, hi]
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                               [](const Atom& a, double value) { return a.hi < value; });
    if (it != atoms_.end() && it->lo < t && t <= it->hi) return &*it;
    return nullptr;
  }

  std::vector<Atom> atoms_;
};

/// L1 distance between the right-continuous maps, i.e. the integral of
/// |F o F^{-1}(t) - G o G^{-1}(t)| over (0,1). Exact: both maps are piecewise linear.
inline double range_l1_distance(const RangeProfile& a, const RangeProfile& b) {
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& atom : a.atoms()) cuts.insert(cuts.end(), {atom.lo, atom.hi});
  for (const auto& atom : b.atoms()) cuts.insert(cuts.end(), {atom.lo, atom.hi});
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= lo) continue;
    // the difference is affine on (lo, hi]; evaluate just inside the open end
    const double mid = 0.5 * (lo + hi);
    const double slope_a = a.upper(mid) == mid ? 1.0 : 0.0;
    const double slope_b = b.upper(mid) == mid ? 1.0 : 0.0;
    const double d_mid = a.upper(mid) - b.upper(mid);
    const double slope = slope_a - slope_b;
    const double d_lo = d_mid - slope * (mid - lo);
    const double d_hi = d_mid + slope * (hi - mid);
    if (d_lo * d_hi >= 0.0) {
      total += 0.5 * (std::abs(d_lo) + std::abs(d_hi)) * (hi - lo);
    } else {
      const double root = lo + (hi - lo) * std::abs(d_lo) / (std::abs(d_lo) + std::abs(d_hi));
      total += 0.5 * std::abs(d_lo) * (root - lo) + 0.5 * std::abs(d_hi) * (hi - root);
    }
  }
  return total;
}

}  // namespace ximarkov
