#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lutzlab/errors.hpp"

namespace lutzlab {

struct Generator {
  std::string name;
  int degree = 0;  // parity, 0 or 1
  mpq_class action;
};

// Product of generators in canonical (generator index) order. Odd generators
// appear with exponent at most 1.
struct Monomial {
  std::vector<std::pair<int, int>> factors;  // (generator index, exponent), sorted by index

  bool is_unit() const { return factors.empty(); }
  int length() const;
  friend bool operator<(const Monomial& a, const Monomial& b) { return a.factors < b.factors; }
  friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors == b.factors; }
};

using Element = std::map<Monomial, mpq_class>;

struct Term {
  mpq_class coeff;
  std::vector<std::string> word;  // generator names; empty word is the unit
};

class FilteredDGA {
 public:
  FilteredDGA() = default;
  // Validates parity and the strict action drop of every differential.
  FilteredDGA(std::vector<Generator> generators, std::map<std::string, std::vector<Term>> differential,
              mpq_class action_cap, int word_cap);

  const std::vector<Generator>& generators() const { return gens_; }
  const mpq_class& action_cap() const { return action_cap_; }
  int word_cap() const { return word_cap_; }
  int index_of(const std::string& name) const;

  int degree(const Monomial& m) const;
  mpq_class action(const Monomial& m) const;
  // Largest monomial action in e; 0 for the zero element.
  mpq_class action(const Element& e) const;
  std::string label(const Monomial& m) const;
  Monomial monomial(const std::vector<std::string>& word, int* sign = nullptr) const;

  // Product with Koszul signs; zero when an odd generator repeats.
  Element multiply(const Element& a, const Element& b) const;
  const Element& differential(int gen) const { return diff_[gen]; }

  // Monomials with action <= action_cap and length <= word_cap, sorted by
  // (action, generator names, length).
  std::vector<Monomial> basis(std::size_t limit = 200000) const;
  bool within_caps(const Monomial& m) const;

 private:
  std::vector<Generator> gens_;
  std::vector<Element> diff_;
  mpq_class action_cap_ = 0;
  int word_cap_ = 0;
};

Element boundary(const FilteredDGA& dga, const Element& e);
Element boundary(const FilteredDGA& dga, const Monomial& m);

bool d_squared_check(const FilteredDGA& dga);

// Lowest action t such that 1 is a boundary of an element of action <= t.
std::optional<mpq_class> unit_vanishing_level(const FilteredDGA& dga);

// l + A(y) for a closed monomial y.
mpq_class leibniz_upper_bound(const FilteredDGA& dga, const Monomial& y);

struct Bar {
  std::string label;
  mpq_class birth;
  std::optional<mpq_class> death;  // nullopt for an infinite bar
  std::size_t birth_index = 0;     // position in the ordered basis
  std::size_t death_index = 0;
  friend bool operator==(const Bar& a, const Bar& b) {
    return a.label == b.label && a.birth == b.birth && a.death == b.death &&
           a.birth_index == b.birth_index && (!a.death || a.death_index == b.death_index);
  }
};

struct Barcode {
  std::vector<Bar> bars;  // sorted by birth index
  std::vector<Monomial> basis;
};

// Column reduction of the ordered boundary matrix.
Barcode barcode(const FilteredDGA& dga);
// Independent path: persistence pairs from ranks of lower-left submatrices of
// the dense boundary matrix. Limited to 5000 basis elements.
Barcode brute_force_oracle(const FilteredDGA& dga);

// Random DGA with at most max_generators generators, integer actions in
// [1, max_action], and differentials built from cycles of the earlier
// generators, so d^2 = 0 holds by construction. Differential words have
// length at most 1, which keeps boundaries inside the word cap.
FilteredDGA random_admissible_dga(std::mt19937_64& rng, int max_generators = 4, int max_action = 6,
                                  mpq_class action_cap = 10, int word_cap = 4);

}  // namespace lutzlab
