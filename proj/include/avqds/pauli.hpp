#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace avqds {

using complex = std::complex<double>;

inline complex phase_from_exponent(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Pauli string on n qubits with an exact Z4 phase:
//   operator = i^phase_exponent * (tensor product of per-site letters).
// Site j is tracked by bit j of two masks: x bit set for X/Y, z bit set for
// Y/Z.  Internal arithmetic uses the symplectic form i^q * X^x * Z^z with
// q = phase_exponent + (#Y letters), so products need a single popcount.
class PauliString {
 public:
  static constexpr int kMaxQubits = 32;

  explicit PauliString(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
      throw std::invalid_argument("PauliString: n_qubits must be in [1, " +
                                  std::to_string(kMaxQubits) + "]");
  }

  static PauliString identity(int n_qubits) { return PauliString(n_qubits); }

  int n_qubits() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }

  // i^phase_exponent with the exponent reduced mod 4
  int phase_exponent() const { return p_; }
  complex phase() const { return phase_from_exponent(p_); }
  bool is_phase_free() const { return p_ == 0; }

  char letter(int site) const {
    check_site(site);
    const bool x = (x_ >> site) & 1u;
    const bool z = (z_ >> site) & 1u;
    if (x && z) return 'Y';
    if (x) return 'X';
    if (z) return 'Z';
    return 'I';
  }

  void set_letter(int site, char l) {
    check_site(site);
    const std::uint64_t bit = std::uint64_t{1} << site;
    x_ &= ~bit;
    z_ &= ~bit;
    switch (l) {
      case 'I': break;
      case 'X': x_ |= bit; break;
      case 'Y': x_ |= bit; z_ |= bit; break;
      case 'Z': z_ |= bit; break;
      default:
        throw std::invalid_argument(std::string("PauliString: bad letter '") +
                                    l + "'");
    }
  }

  int weight() const { return std::popcount(x_ | z_); }
  bool is_identity() const { return (x_ | z_) == 0; }

  PauliString without_phase() const {
    PauliString r = *this;
    r.p_ = 0;
    return r;
  }

  PauliString with_phase_exponent(int k) const {
    PauliString r = *this;
    r.p_ = static_cast<std::uint8_t>(k & 3);
    return r;
  }

  // letter-pattern key, ignores phase; valid since n <= 32
  std::uint64_t pattern_key() const { return x_ | (z_ << 32); }

  bool operator==(const PauliString& o) const {
    return n_ == o.n_ && x_ == o.x_ && z_ == o.z_ && p_ == o.p_;
  }
  bool operator!=(const PauliString& o) const { return !(*this == o); }

  friend PauliString pauli_product(const PauliString& a, const PauliString& b);

 private:
  void check_site(int site) const {
    if (site < 0 || site >= n_)
      throw std::invalid_argument("PauliString: site " + std::to_string(site) +
                                  " out of range for " + std::to_string(n_) +
                                  " qubits");
  }

  int symplectic_q() const {
    return (p_ + std::popcount(x_ & z_)) & 3;
  }

  int n_;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  std::uint8_t p_ = 0;
};

inline PauliString pauli_product(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits())
    throw std::invalid_argument("pauli_product: qubit counts differ");
  PauliString r(a.n_qubits());
  r.x_ = a.x_ ^ b.x_;
  r.z_ = a.z_ ^ b.z_;
  // X^x Z^z reordering: Z^{za} X^{xb} = (-1)^{|za & xb|} X^{xb} Z^{za}
  const int q = a.symplectic_q() + b.symplectic_q() +
                2 * std::popcount(a.z_ & b.x_);
  const int n_y = std::popcount(r.x_ & r.z_);
  r.p_ = static_cast<std::uint8_t>((q - n_y) & 3);
  return r;
}

inline bool pauli_commute(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits())
    throw std::invalid_argument("pauli_commute: qubit counts differ");
  const int parity = (std::popcount(a.x_mask() & b.z_mask()) +
                      std::popcount(a.z_mask() & b.x_mask())) & 1;
  return parity == 0;
}

// Grammar: space-separated tokens [XYZ]<site>, each site at most once; the
// single token "I" denotes the identity.  Produces a phase-free string.
inline PauliString parse_pauli(std::string_view text, int n_qubits) {
  PauliString r(n_qubits);
  std::size_t i = 0;
  bool any_token = false;
  bool saw_identity = false;
  while (i < text.size()) {
    if (text[i] == ' ') {
      ++i;
      continue;
    }
    const std::size_t tok_at = i;
    const char l = text[i];
    if (saw_identity)
      throw std::invalid_argument(
          "parse_pauli: 'I' must be the only token (offset " +
          std::to_string(tok_at) + ")");
    if (l == 'I') {
      ++i;
      if (i < text.size() && text[i] != ' ')
        throw std::invalid_argument(
            "parse_pauli: unexpected character after 'I' at offset " +
            std::to_string(i));
      if (any_token)
        throw std::invalid_argument(
            "parse_pauli: 'I' must be the only token (offset " +
            std::to_string(tok_at) + ")");
      any_token = true;
      saw_identity = true;
      continue;
    }
    if (l != 'X' && l != 'Y' && l != 'Z')
      throw std::invalid_argument(std::string("parse_pauli: unexpected character '") +
                                  l + "' at offset " + std::to_string(i));
    ++i;
    if (i >= text.size() || text[i] < '0' || text[i] > '9')
      throw std::invalid_argument("parse_pauli: missing site index at offset " +
                                  std::to_string(i));
    long site = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      site = site * 10 + (text[i] - '0');
      if (site > PauliString::kMaxQubits)
        throw std::invalid_argument("parse_pauli: site index too large at offset " +
                                    std::to_string(tok_at));
      ++i;
    }
    if (site >= n_qubits)
      throw std::invalid_argument("parse_pauli: site " + std::to_string(site) +
                                  " out of range for " + std::to_string(n_qubits) +
                                  " qubits (offset " + std::to_string(tok_at) + ")");
    if (r.letter(static_cast<int>(site)) != 'I')
      throw std::invalid_argument("parse_pauli: duplicate site " +
                                  std::to_string(site) + " at offset " +
                                  std::to_string(tok_at));
    r.set_letter(static_cast<int>(site), l);
    any_token = true;
  }
  if (!any_token)
    throw std::invalid_argument("parse_pauli: empty string");
  return r;
}

inline std::string format_pauli(const PauliString& p) {
  if (!p.is_phase_free())
    throw std::invalid_argument("format_pauli: string carries a phase");
  if (p.is_identity()) return "I";
  std::string out;
  for (int site = 0; site < p.n_qubits(); ++site) {
    const char l = p.letter(site);
    if (l == 'I') continue;
    if (!out.empty()) out += ' ';
    out += l;
    out += std::to_string(site);
  }
  return out;
}

struct PauliTerm {
  double coeff;
  PauliString str;  // phase-free
};

// Hermitian sum of phase-free Pauli strings with real coefficients.  Terms
// keep first-insertion order; duplicate letter patterns are merged on add.
// compress() drops magnitudes below kDropTol; builders that must preserve a
// fixed term structure across coefficient changes simply never call it.
class PauliSum {
 public:
  static constexpr double kDropTol = 1e-14;

  explicit PauliSum(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > PauliString::kMaxQubits)
      throw std::invalid_argument("PauliSum: n_qubits out of range");
  }

  int n_qubits() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  const std::vector<PauliTerm>& terms() const { return terms_; }

  PauliSum& add(double coeff, const PauliString& s) {
    if (s.n_qubits() != n_)
      throw std::invalid_argument("PauliSum::add: qubit counts differ");
    double c = coeff;
    switch (s.phase_exponent()) {
      case 0: break;
      case 2: c = -c; break;
      default:
        throw std::invalid_argument(
            "PauliSum::add: imaginary phase makes the coefficient non-real");
    }
    const std::uint64_t key = s.pattern_key();
    auto it = index_.find(key);
    if (it != index_.end()) {
      terms_[it->second].coeff += c;
    } else {
      index_.emplace(key, terms_.size());
      terms_.push_back(PauliTerm{c, s.without_phase()});
    }
    return *this;
  }

  void compress(double drop_tol = kDropTol) {
    std::vector<PauliTerm> kept;
    kept.reserve(terms_.size());
    for (const auto& t : terms_)
      if (std::abs(t.coeff) >= drop_tol) kept.push_back(t);
    terms_ = std::move(kept);
    index_.clear();
    for (std::size_t i = 0; i < terms_.size(); ++i)
      index_.emplace(terms_[i].str.pattern_key(), i);
  }

  bool contains(const PauliString& pattern) const {
    return index_.count(pattern.pattern_key()) != 0;
  }

  double coefficient(const PauliString& pattern) const {
    auto it = index_.find(pattern.pattern_key());
    return it == index_.end() ? 0.0 : terms_[it->second].coeff;
  }

  double one_norm() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coeff);
    return s;
  }

 private:
  int n_;
  std::vector<PauliTerm> terms_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

// Structural cache for h^2 over a fixed term-pattern list.  Anticommuting
// cross terms cancel exactly; commuting pairs contribute 2*c_i*c_j*sign with
// sign = +-1, so the string products are computed once and only coefficient
// arithmetic is redone per refresh.  The refreshed sum is not compressed, so
// its term structure is stable across coefficient changes.
class SquaredSumCache {
 public:
  SquaredSumCache() = default;

  explicit SquaredSumCache(const PauliSum& structure) : n_(structure.n_qubits()) {
    const auto& terms = structure.terms();
    for (const auto& t : terms) structure_keys_.push_back(t.str.pattern_key());
    std::unordered_map<std::uint64_t, std::size_t> out_index;
    auto out_slot = [&](const PauliString& pattern) {
      const std::uint64_t key = pattern.pattern_key();
      auto it = out_index.find(key);
      if (it != out_index.end()) return it->second;
      const std::size_t slot = out_strings_.size();
      out_index.emplace(key, slot);
      out_strings_.push_back(pattern.without_phase());
      return slot;
    };
    for (std::size_t i = 0; i < terms.size(); ++i) {
      // P_i^2 = I
      contribs_.push_back({static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(i), 1.0,
                           static_cast<std::uint32_t>(out_slot(PauliString(n_)))});
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        if (!pauli_commute(terms[i].str, terms[j].str)) continue;
        const PauliString prod = pauli_product(terms[i].str, terms[j].str);
        const int p = prod.phase_exponent();
        const double sign = (p == 0) ? 1.0 : -1.0;  // commuting product phase is +-1
        contribs_.push_back({static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(j), 2.0 * sign,
                             static_cast<std::uint32_t>(out_slot(prod))});
      }
    }
  }

  bool matches(const PauliSum& h) const {
    if (h.n_qubits() != n_ || h.size() != structure_keys_.size()) return false;
    for (std::size_t i = 0; i < structure_keys_.size(); ++i)
      if (h.terms()[i].str.pattern_key() != structure_keys_[i]) return false;
    return true;
  }

  const PauliSum& refresh(const PauliSum& h) {
    if (!matches(h))
      throw std::invalid_argument("SquaredSumCache: term structure mismatch");
    std::vector<double> coeffs(out_strings_.size(), 0.0);
    const auto& terms = h.terms();
    for (const auto& c : contribs_)
      coeffs[c.out] += c.weight * terms[c.i].coeff * terms[c.j].coeff;
    squared_ = PauliSum(n_);
    for (std::size_t k = 0; k < out_strings_.size(); ++k)
      squared_.add(coeffs[k], out_strings_[k]);
    return squared_;
  }

 private:
  struct Contribution {
    std::uint32_t i, j;
    double weight;
    std::uint32_t out;
  };

  int n_ = 1;
  std::vector<std::uint64_t> structure_keys_;
  std::vector<PauliString> out_strings_;
  std::vector<Contribution> contribs_;
  PauliSum squared_{1};
};

inline PauliSum square(const PauliSum& h) {
  SquaredSumCache cache(h);
  PauliSum sq = cache.refresh(h);
  sq.compress();
  return sq;
}

}  // namespace avqds
