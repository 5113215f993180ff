#include "lutzlab/persistence.hpp"

#include <algorithm>
#include <functional>

namespace lutzlab {

int Monomial::length() const {
  int n = 0;
  for (const auto& [g, e] : factors) n += e;
  return n;
}

namespace {

void add_to(Element& e, const Monomial& m, const mpq_class& c) {
  if (sgn(c) == 0) return;
  auto [it, inserted] = e.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) e.erase(it);
  }
}

}  // namespace

FilteredDGA::FilteredDGA(std::vector<Generator> generators,
                         std::map<std::string, std::vector<Term>> differential, mpq_class action_cap,
                         int word_cap)
    : gens_(std::move(generators)), action_cap_(std::move(action_cap)), word_cap_(word_cap) {
  if (word_cap_ < 0) throw PreconditionFailed("word_cap must be nonnegative");
  if (sgn(action_cap_) < 0) throw PreconditionFailed("action_cap must be nonnegative");
  std::sort(gens_.begin(), gens_.end(),
            [](const Generator& a, const Generator& b) { return a.name < b.name; });
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    Generator& g = gens_[i];
    if (g.name.empty()) throw InputError("generators: empty name");
    if (i > 0 && gens_[i - 1].name == g.name) throw InputError("generators: duplicate name " + g.name);
    g.degree = ((g.degree % 2) + 2) % 2;
    if (sgn(g.action) <= 0) throw PreconditionFailed("generator " + g.name + ": action must be positive");
  }
  diff_.assign(gens_.size(), Element{});
  for (const auto& [name, terms] : differential) {
    const int gi = index_of(name);
    if (gi < 0) throw InputError("differential: unknown generator " + name);
    Element d;
    for (const Term& t : terms) {
      int sign = 1;
      const Monomial m = monomial(t.word, &sign);
      if (sign == 0) continue;
      add_to(d, m, sign * t.coeff);
    }
    for (const auto& [m, c] : d) {
      if (degree(m) != (gens_[gi].degree + 1) % 2) {
        throw PreconditionFailed("differential of " + name + ": term " + label(m) + " has the wrong parity");
      }
      if (!(action(m) < gens_[gi].action)) {
        throw PreconditionFailed("differential of " + name + ": term " + label(m) +
                                 " does not lower the action");
      }
    }
    diff_[gi] = std::move(d);
  }
}

int FilteredDGA::index_of(const std::string& name) const {
  const auto it = std::lower_bound(gens_.begin(), gens_.end(), name,
                                   [](const Generator& g, const std::string& n) { return g.name < n; });
  if (it == gens_.end() || it->name != name) return -1;
  return static_cast<int>(it - gens_.begin());
}

int FilteredDGA::degree(const Monomial& m) const {
  int d = 0;
  for (const auto& [g, e] : m.factors) d += e * gens_[g].degree;
  return d % 2;
}

mpq_class FilteredDGA::action(const Monomial& m) const {
  mpq_class a = 0;
  for (const auto& [g, e] : m.factors) a += e * gens_[g].action;
  return a;
}

mpq_class FilteredDGA::action(const Element& e) const {
  mpq_class a = 0;
  for (const auto& [m, c] : e) a = std::max(a, action(m));
  return a;
}

std::string FilteredDGA::label(const Monomial& m) const {
  if (m.is_unit()) return "1";
  std::string s;
  for (const auto& [g, e] : m.factors) {
    if (!s.empty()) s += '*';
    s += gens_[g].name;
    if (e > 1) s += '^' + std::to_string(e);
  }
  return s;
}

Monomial FilteredDGA::monomial(const std::vector<std::string>& word, int* sign) const {
  std::vector<int> idx;
  idx.reserve(word.size());
  for (const std::string& w : word) {
    const int i = index_of(w);
    if (i < 0) throw InputError("word: unknown generator " + w);
    idx.push_back(i);
  }
  // Sorting the word permutes odd factors past each other.
  int s = 1;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (idx[a] > idx[b] && gens_[idx[a]].degree == 1 && gens_[idx[b]].degree == 1) s = -s;
  std::sort(idx.begin(), idx.end());
  Monomial m;
  for (int i : idx) {
    if (!m.factors.empty() && m.factors.back().first == i) {
      ++m.factors.back().second;
    } else {
      m.factors.emplace_back(i, 1);
    }
  }
  for (const auto& [g, e] : m.factors)
    if (gens_[g].degree == 1 && e > 1) s = 0;
  if (sign) *sign = s;
  return m;
}

Element FilteredDGA::multiply(const Element& a, const Element& b) const {
  Element out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      int s = 1;
      bool zero = false;
      for (const auto& [ga, ea] : ma.factors) {
        if (gens_[ga].degree == 0) continue;
        for (const auto& [gb, eb] : mb.factors) {
          if (gens_[gb].degree == 0) continue;
          if (ga == gb) zero = true;
          if (gb < ga) s = -s;
        }
      }
      if (zero) continue;
      Monomial m;
      std::size_t i = 0, j = 0;
      while (i < ma.factors.size() || j < mb.factors.size()) {
        if (j == mb.factors.size() || (i < ma.factors.size() && ma.factors[i].first < mb.factors[j].first)) {
          m.factors.push_back(ma.factors[i++]);
        } else if (i == ma.factors.size() || mb.factors[j].first < ma.factors[i].first) {
          m.factors.push_back(mb.factors[j++]);
        } else {
          m.factors.emplace_back(ma.factors[i].first, ma.factors[i].second + mb.factors[j].second);
          ++i;
          ++j;
        }
      }
      add_to(out, m, s * ca * cb);
    }
  }
  return out;
}

bool FilteredDGA::within_caps(const Monomial& m) const {
  return m.length() <= word_cap_ && action(m) <= action_cap_;
}

std::vector<Monomial> FilteredDGA::basis(std::size_t limit) const {
  std::vector<Monomial> out;
  Monomial cur;
  std::function<void(std::size_t, int, const mpq_class&)> rec = [&](std::size_t g, int len,
                                                                    const mpq_class& act) {
    if (g == gens_.size()) {
      if (out.size() >= limit) {
        throw BasisOverflow("basis exceeds " + std::to_string(limit) + " monomials");
      }
      out.push_back(cur);
      return;
    }
    rec(g + 1, len, act);
    const int emax = gens_[g].degree == 1 ? 1 : word_cap_ - len;
    mpq_class a = act;
    for (int e = 1; e <= emax && len + e <= word_cap_; ++e) {
      a += gens_[g].action;
      if (a > action_cap_) break;
      cur.factors.emplace_back(static_cast<int>(g), e);
      rec(g + 1, len + e, a);
      cur.factors.pop_back();
    }
  };
  rec(0, 0, mpq_class(0));

  struct Key {
    mpq_class action;
    std::vector<std::string> names;
    int length;
  };
  std::vector<std::pair<Key, std::size_t>> keys;
  keys.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Key k{action(out[i]), {}, out[i].length()};
    for (const auto& [g, e] : out[i].factors)
      for (int r = 0; r < e; ++r) k.names.push_back(gens_[g].name);
    keys.emplace_back(std::move(k), i);
  }
  std::sort(keys.begin(), keys.end(), [](const auto& x, const auto& y) {
    if (x.first.action != y.first.action) return x.first.action < y.first.action;
    if (x.first.names != y.first.names) return x.first.names < y.first.names;
    return x.first.length < y.first.length;
  });
  std::vector<Monomial> sorted;
  sorted.reserve(out.size());
  for (const auto& [k, i] : keys) sorted.push_back(out[i]);
  return sorted;
}

Element boundary(const FilteredDGA& dga, const Monomial& m) {
  if (!dga.within_caps(m)) throw BasisOverflow("boundary: input " + dga.label(m) + " exceeds the caps");
  std::vector<int> word;
  for (const auto& [g, e] : m.factors)
    for (int r = 0; r < e; ++r) word.push_back(g);
  const auto& gens = dga.generators();

  Element out;
  int prefix_degree = 0;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const Element& d = dga.differential(word[i]);
    if (!d.empty()) {
      Monomial pre, post;
      for (std::size_t k = 0; k < word.size(); ++k) {
        if (k == i) continue;
        Monomial& t = k < i ? pre : post;
        if (!t.factors.empty() && t.factors.back().first == word[k]) {
          ++t.factors.back().second;
        } else {
          t.factors.emplace_back(word[k], 1);
        }
      }
      const Element term = dga.multiply(dga.multiply(Element{{pre, 1}}, d), Element{{post, 1}});
      const mpq_class s = prefix_degree % 2 == 0 ? 1 : -1;
      for (const auto& [mm, c] : term) add_to(out, mm, s * c);
    }
    prefix_degree += gens[word[i]].degree;
  }
  for (const auto& [mm, c] : out) {
    if (!dga.within_caps(mm)) {
      throw BasisOverflow("boundary of " + dga.label(m) + " produces " + dga.label(mm) +
                          ", which exceeds the caps");
    }
  }
  return out;
}

Element boundary(const FilteredDGA& dga, const Element& e) {
  Element out;
  for (const auto& [m, c] : e) {
    for (const auto& [mm, cc] : boundary(dga, m)) add_to(out, mm, c * cc);
  }
  return out;
}

bool d_squared_check(const FilteredDGA& dga) {
  for (const Monomial& m : dga.basis()) {
    if (!boundary(dga, boundary(dga, m)).empty()) return false;
  }
  return true;
}

namespace {

using SparseVec = std::map<std::size_t, mpq_class>;

struct Complex {
  std::vector<Monomial> basis;
  std::vector<SparseVec> columns;  // boundary of basis[j] in basis coordinates
};

Complex build_complex(const FilteredDGA& dga, std::size_t limit) {
  if (!d_squared_check(dga)) throw PreconditionFailed("the differential does not square to zero");
  Complex c;
  c.basis = dga.basis(limit);
  std::map<Monomial, std::size_t> index;
  for (std::size_t i = 0; i < c.basis.size(); ++i) index.emplace(c.basis[i], i);
  c.columns.resize(c.basis.size());
  for (std::size_t j = 0; j < c.basis.size(); ++j) {
    for (const auto& [m, v] : boundary(dga, c.basis[j])) {
      const std::size_t i = index.at(m);
      if (i >= j) throw PreconditionFailed("boundary does not lower the filtration");
      c.columns[j].emplace(i, v);
    }
  }
  return c;
}

// col -= f * other, dropping zero entries.
void axpy(SparseVec& col, const mpq_class& f, const SparseVec& other) {
  for (const auto& [i, v] : other) {
    auto [it, inserted] = col.emplace(i, -f * v);
    if (!inserted) {
      it->second -= f * v;
      if (sgn(it->second) == 0) col.erase(it);
    }
  }
}

Barcode assemble(const FilteredDGA& dga, std::vector<Monomial> basis,
                 const std::vector<std::ptrdiff_t>& death_of, const std::vector<bool>& positive) {
  Barcode bc;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (!positive[i]) continue;
    Bar b;
    b.label = dga.label(basis[i]);
    b.birth = dga.action(basis[i]);
    b.birth_index = i;
    if (death_of[i] >= 0) {
      b.death_index = static_cast<std::size_t>(death_of[i]);
      b.death = dga.action(basis[b.death_index]);
    }
    bc.bars.push_back(std::move(b));
  }
  bc.basis = std::move(basis);
  return bc;
}

}  // namespace

std::optional<mpq_class> unit_vanishing_level(const FilteredDGA& dga) {
  const Complex c = build_complex(dga, 200000);
  // Echelon rows keyed by their lowest index; 1 sits at index 0.
  std::map<std::size_t, SparseVec> pivots;
  for (std::size_t j = 0; j < c.basis.size(); ++j) {
    SparseVec v = c.columns[j];
    while (!v.empty()) {
      const auto it = pivots.find(v.begin()->first);
      if (it == pivots.end()) break;
      axpy(v, v.begin()->second / it->second.begin()->second, it->second);
    }
    if (v.empty()) continue;
    pivots.emplace(v.begin()->first, std::move(v));

    SparseVec unit{{0, mpq_class(1)}};
    while (!unit.empty()) {
      const auto it = pivots.find(unit.begin()->first);
      if (it == pivots.end()) break;
      axpy(unit, unit.begin()->second / it->second.begin()->second, it->second);
    }
    if (unit.empty()) return dga.action(c.basis[j]);
  }
  return std::nullopt;
}

mpq_class leibniz_upper_bound(const FilteredDGA& dga, const Monomial& y) {
  if (!boundary(dga, y).empty()) throw PreconditionFailed("leibniz_upper_bound: y is not closed");
  const std::optional<mpq_class> l = unit_vanishing_level(dga);
  if (!l) throw PreconditionFailed("leibniz_upper_bound: the unit never vanishes under the caps");
  return *l + dga.action(y);
}

Barcode barcode(const FilteredDGA& dga) {
  Complex c = build_complex(dga, 200000);
  const std::size_t n = c.basis.size();
  std::vector<std::ptrdiff_t> owner(n, -1);  // column whose reduced low is i
  std::vector<bool> positive(n, false);
  std::vector<std::ptrdiff_t> death_of(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    SparseVec& col = c.columns[j];
    while (!col.empty()) {
      const std::size_t low = col.rbegin()->first;
      if (owner[low] < 0) break;
      const SparseVec& other = c.columns[static_cast<std::size_t>(owner[low])];
      axpy(col, col.rbegin()->second / other.rbegin()->second, other);
    }
    if (col.empty()) {
      positive[j] = true;
    } else {
      const std::size_t low = col.rbegin()->first;
      owner[low] = static_cast<std::ptrdiff_t>(j);
      death_of[low] = static_cast<std::ptrdiff_t>(j);
    }
  }
  return assemble(dga, std::move(c.basis), death_of, positive);
}

Barcode brute_force_oracle(const FilteredDGA& dga) {
  const Complex c = build_complex(dga, 5000);
  const std::size_t n = c.basis.size();
  std::vector<std::vector<mpq_class>> D(n, std::vector<mpq_class>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (const auto& [i, v] : c.columns[j]) D[i][j] = v;

  // rank_rows[i] = rank of D restricted to rows >= i and columns <= j.
  auto ranks_for = [&](std::ptrdiff_t j) {
    std::vector<std::size_t> r(n + 1, 0);
    if (j < 0) return r;
    const std::size_t cols = static_cast<std::size_t>(j) + 1;
    std::map<std::size_t, std::vector<mpq_class>> echelon;  // keyed by leading column
    for (std::size_t i = n; i-- > 0;) {
      std::vector<mpq_class> row(D[i].begin(), D[i].begin() + static_cast<std::ptrdiff_t>(cols));
      std::size_t p = 0;
      while (true) {
        while (p < cols && sgn(row[p]) == 0) ++p;
        if (p == cols) break;
        const auto it = echelon.find(p);
        if (it == echelon.end()) {
          echelon.emplace(p, std::move(row));
          break;
        }
        const mpq_class f = row[p] / it->second[p];
        for (std::size_t q = p; q < cols; ++q) row[q] -= f * it->second[q];
      }
      r[i] = echelon.size();
    }
    return r;
  };

  std::vector<std::ptrdiff_t> death_of(n, -1);
  std::vector<bool> positive(n, false);
  std::vector<std::size_t> prev = ranks_for(-1);
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<std::size_t> cur = ranks_for(static_cast<std::ptrdiff_t>(j));
    positive[j] = cur[0] == prev[0];
    for (std::size_t i = 0; i < j; ++i) {
      const long m = static_cast<long>(cur[i]) - static_cast<long>(cur[i + 1]) -
                     static_cast<long>(prev[i]) + static_cast<long>(prev[i + 1]);
      if (m == 1) death_of[i] = static_cast<std::ptrdiff_t>(j);
    }
    prev = cur;
  }
  return assemble(dga, c.basis, death_of, positive);
}

FilteredDGA random_admissible_dga(std::mt19937_64& rng, int max_generators, int max_action,
                                  mpq_class action_cap, int word_cap) {
  std::uniform_int_distribution<int> ngen(1, max_generators);
  std::uniform_int_distribution<int> half_steps(2, 2 * max_action);
  std::uniform_int_distribution<int> parity(0, 1);
  std::uniform_int_distribution<int> coeff(-2, 2);
  std::uniform_int_distribution<int> denom(1, 3);

  const int n = ngen(rng);
  std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g", "h"};
  std::shuffle(names.begin(), names.end(), rng);
  std::vector<Generator> gens(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gens[i].name = names[static_cast<std::size_t>(i % names.size())] +
                   (i >= static_cast<int>(names.size()) ? std::to_string(i) : "");
    gens[i].degree = parity(rng);
    gens[i].action = mpq_class(half_steps(rng), 2);
  }
  std::sort(gens.begin(), gens.end(), [](const Generator& x, const Generator& y) {
    return x.action != y.action ? x.action < y.action : x.name < y.name;
  });

  // Differentials are combinations of 1 and lower generators; a candidate
  // combination is admissible when it is a cycle.
  std::map<std::string, std::vector<Term>> diff;
  std::map<std::string, std::map<std::string, mpq_class>> linear;  // generator -> (word -> coeff), "" is 1
  for (int g = 0; g < n; ++g) {
    const int target = (gens[g].degree + 1) % 2;
    std::vector<std::string> cand;
    if (target == 0) cand.push_back("");
    for (int h = 0; h < g; ++h)
      if (gens[h].degree == target && gens[h].action < gens[g].action) cand.push_back(gens[h].name);
    if (cand.empty()) continue;

    // Boundary matrix of the candidates over the words of length <= 1.
    std::vector<std::string> rows;
    for (const std::string& c : cand)
      if (!c.empty())
        for (const auto& [w, v] : linear[c]) rows.push_back(w);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    const std::size_t R = rows.size(), C = cand.size();
    std::vector<std::vector<mpq_class>> M(R, std::vector<mpq_class>(C));
    for (std::size_t j = 0; j < C; ++j) {
      if (cand[j].empty()) continue;
      for (const auto& [w, v] : linear[cand[j]]) {
        const std::size_t i = static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), w) - rows.begin());
        M[i][j] = v;
      }
    }
    // Reduced row echelon form, then read off the nullspace.
    std::vector<std::ptrdiff_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t j = 0; j < C && r < R; ++j) {
      std::size_t p = r;
      while (p < R && sgn(M[p][j]) == 0) ++p;
      if (p == R) continue;
      std::swap(M[p], M[r]);
      const mpq_class inv = 1 / M[r][j];
      for (auto& x : M[r]) x *= inv;
      for (std::size_t i = 0; i < R; ++i) {
        if (i == r || sgn(M[i][j]) == 0) continue;
        const mpq_class f = M[i][j];
        for (std::size_t q = 0; q < C; ++q) M[i][q] -= f * M[r][q];
      }
      pivot_col.push_back(static_cast<std::ptrdiff_t>(j));
      ++r;
    }
    std::vector<bool> is_pivot(C, false);
    for (auto pc : pivot_col) is_pivot[static_cast<std::size_t>(pc)] = true;
    std::vector<mpq_class> combo(C, 0);
    for (std::size_t f = 0; f < C; ++f) {
      if (is_pivot[f]) continue;
      const mpq_class w(coeff(rng), denom(rng));
      if (sgn(w) == 0) continue;
      combo[f] += w;
      for (std::size_t k = 0; k < pivot_col.size(); ++k) combo[static_cast<std::size_t>(pivot_col[k])] -= w * M[k][f];
    }
    std::vector<Term> terms;
    for (std::size_t j = 0; j < C; ++j) {
      if (sgn(combo[j]) == 0) continue;
      Term t;
      t.coeff = combo[j];
      if (!cand[j].empty()) t.word = {cand[j]};
      terms.push_back(t);
      linear[gens[g].name][cand[j]] += combo[j];
    }
    if (!terms.empty()) diff[gens[g].name] = std::move(terms);
  }
  return FilteredDGA(std::move(gens), std::move(diff), std::move(action_cap), word_cap);
}

}  // namespace lutzlab
