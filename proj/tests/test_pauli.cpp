#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "avqds/pauli.hpp"
#include "oracles.hpp"

using avqds::PauliString;
using avqds::PauliSum;
using avqds::complex;

TEST_CASE("identity string", "[pauli]") {
  PauliString p(4);
  REQUIRE(p.is_identity());
  REQUIRE(p.weight() == 0);
  REQUIRE(p.phase_exponent() == 0);
  for (int s = 0; s < 4; ++s) REQUIRE(p.letter(s) == 'I');
}

TEST_CASE("letter round trip", "[pauli]") {
  PauliString p(5);
  p.set_letter(0, 'X');
  p.set_letter(2, 'Y');
  p.set_letter(4, 'Z');
  REQUIRE(p.letter(0) == 'X');
  REQUIRE(p.letter(1) == 'I');
  REQUIRE(p.letter(2) == 'Y');
  REQUIRE(p.letter(3) == 'I');
  REQUIRE(p.letter(4) == 'Z');
  REQUIRE(p.weight() == 3);
  p.set_letter(2, 'I');
  REQUIRE(p.letter(2) == 'I');
  REQUIRE(p.weight() == 2);
}

TEST_CASE("bad constructions rejected", "[pauli]") {
  REQUIRE_THROWS_AS(PauliString(0), std::invalid_argument);
  REQUIRE_THROWS_AS(PauliString(33), std::invalid_argument);
  PauliString p(2);
  REQUIRE_THROWS_AS(p.set_letter(2, 'X'), std::invalid_argument);
  REQUIRE_THROWS_AS(p.set_letter(0, 'Q'), std::invalid_argument);
}

TEST_CASE("single-site product table", "[pauli]") {
  auto S = [](char l) {
    PauliString p(1);
    p.set_letter(0, l);
    return p;
  };
  struct Case { char a, b, out; int phase; };
  const Case cases[] = {
      {'X', 'Y', 'Z', 1}, {'Y', 'X', 'Z', 3}, {'Y', 'Z', 'X', 1},
      {'Z', 'Y', 'X', 3}, {'Z', 'X', 'Y', 1}, {'X', 'Z', 'Y', 3},
      {'X', 'X', 'I', 0}, {'Y', 'Y', 'I', 0}, {'Z', 'Z', 'I', 0},
      {'I', 'X', 'X', 0}, {'Y', 'I', 'Y', 0},
  };
  for (const auto& c : cases) {
    const PauliString r = pauli_product(S(c.a), S(c.b));
    INFO(c.a << " * " << c.b);
    REQUIRE(r.letter(0) == c.out);
    REQUIRE(r.phase_exponent() == c.phase);
  }
}

TEST_CASE("product of X0 and Y0 is i Z0", "[pauli]") {
  const PauliString a = avqds::parse_pauli("X0", 1);
  const PauliString b = avqds::parse_pauli("Y0", 1);
  const PauliString r = pauli_product(a, b);
  REQUIRE(r.letter(0) == 'Z');
  REQUIRE(r.phase() == complex(0.0, 1.0));
}

TEST_CASE("products match dense oracle exhaustively on 2 qubits", "[pauli]") {
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  std::vector<PauliString> all;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      PauliString p(2);
      p.set_letter(0, letters[a]);
      p.set_letter(1, letters[b]);
      all.push_back(p);
    }
  for (const auto& a : all)
    for (const auto& b : all) {
      const PauliString r = pauli_product(a, b);
      const Eigen::MatrixXcd expected =
          oracle::dense_string(a) * oracle::dense_string(b);
      REQUIRE((oracle::dense_string(r) - expected).norm() < 1e-14);
    }
}

TEST_CASE("products match dense oracle on random 3-qubit strings", "[pauli]") {
  std::mt19937_64 rng{1557};
  for (int trial = 0; trial < 200; ++trial) {
    const PauliString a = oracle::random_string(3, rng, true);
    const PauliString b = oracle::random_string(3, rng, true);
    const PauliString r = pauli_product(a, b);
    const Eigen::MatrixXcd expected =
        oracle::dense_string(a) * oracle::dense_string(b);
    REQUIRE((oracle::dense_string(r) - expected).norm() < 1e-14);
  }
}

TEST_CASE("phase exponents compose mod 4", "[pauli]") {
  const PauliString x = avqds::parse_pauli("X0", 1);
  const PauliString y = avqds::parse_pauli("Y0", 1);
  PauliString iz = pauli_product(x, y);          // i Z
  PauliString m = pauli_product(iz, iz);         // (iZ)(iZ) = -I
  REQUIRE(m.is_identity());
  REQUIRE(m.phase_exponent() == 2);
  m = pauli_product(m, m);                       // (-I)(-I) = I
  REQUIRE(m.phase_exponent() == 0);
}

TEST_CASE("commutation matches dense commutator", "[pauli]") {
  std::mt19937_64 rng{99};
  for (int trial = 0; trial < 200; ++trial) {
    const PauliString a = oracle::random_string(3, rng, true);
    const PauliString b = oracle::random_string(3, rng, true);
    const Eigen::MatrixXcd da = oracle::dense_string(a);
    const Eigen::MatrixXcd db = oracle::dense_string(b);
    const bool dense_commutes = (da * db - db * da).norm() < 1e-12;
    REQUIRE(avqds::pauli_commute(a, b) == dense_commutes);
  }
}

TEST_CASE("parse accepts grammar", "[pauli]") {
  const PauliString p = avqds::parse_pauli("X0 Y2", 4);
  REQUIRE(p.letter(0) == 'X');
  REQUIRE(p.letter(1) == 'I');
  REQUIRE(p.letter(2) == 'Y');
  REQUIRE(p.letter(3) == 'I');
  REQUIRE(p.is_phase_free());

  const PauliString z3 = avqds::parse_pauli("Z3", 4);
  REQUIRE(z3.letter(3) == 'Z');
  REQUIRE(z3.weight() == 1);

  REQUIRE(avqds::parse_pauli("I", 4).is_identity());
  REQUIRE(avqds::parse_pauli("Z1 X0", 2) == avqds::parse_pauli("X0 Z1", 2));
}

TEST_CASE("parse rejects malformed strings with positions", "[pauli]") {
  using Catch::Matchers::ContainsSubstring;
  REQUIRE_THROWS_WITH(avqds::parse_pauli("X0 Q1", 4),
                      ContainsSubstring("'Q'") && ContainsSubstring("offset 3"));
  REQUIRE_THROWS_WITH(avqds::parse_pauli("Z9", 4),
                      ContainsSubstring("out of range"));
  REQUIRE_THROWS_WITH(avqds::parse_pauli("X0 X0", 2),
                      ContainsSubstring("duplicate site 0"));
  REQUIRE_THROWS_AS(avqds::parse_pauli("", 2), std::invalid_argument);
  REQUIRE_THROWS_AS(avqds::parse_pauli("X", 2), std::invalid_argument);
  REQUIRE_THROWS_AS(avqds::parse_pauli("I X0", 2), std::invalid_argument);
}

TEST_CASE("format round trips through parse", "[pauli]") {
  std::mt19937_64 rng{2024};
  for (int trial = 0; trial < 100; ++trial) {
    const PauliString p = oracle::random_string(6, rng, true);
    const std::string text = avqds::format_pauli(p);
    REQUIRE(avqds::parse_pauli(text, 6) == p);
  }
  REQUIRE(avqds::format_pauli(PauliString(3)) == "I");
  const PauliString phased =
      pauli_product(avqds::parse_pauli("X0", 1), avqds::parse_pauli("Y0", 1));
  REQUIRE_THROWS_AS(avqds::format_pauli(phased), std::invalid_argument);
}

TEST_CASE("sum merges duplicates and preserves insertion order", "[pauli]") {
  PauliSum h(3);
  h.add(-2.0, avqds::parse_pauli("X0 X1", 3));
  h.add(0.5, avqds::parse_pauli("Z2", 3));
  h.add(-2.0, avqds::parse_pauli("X0 X1", 3));
  REQUIRE(h.size() == 2);
  REQUIRE(h.terms()[0].coeff == -4.0);
  REQUIRE(h.terms()[0].str == avqds::parse_pauli("X0 X1", 3));
  REQUIRE(h.terms()[1].coeff == 0.5);
}

TEST_CASE("sum folds minus phases and rejects imaginary ones", "[pauli]") {
  const PauliString x = avqds::parse_pauli("X0", 1);
  const PauliString y = avqds::parse_pauli("Y0", 1);
  const PauliString iz = pauli_product(x, y);
  const PauliString minus_z = avqds::parse_pauli("Z0", 1).with_phase_exponent(2);

  PauliSum h(1);
  REQUIRE_THROWS_AS(h.add(1.0, iz), std::invalid_argument);
  REQUIRE(minus_z.phase_exponent() == 2);
  h.add(1.5, minus_z);
  REQUIRE(h.terms()[0].coeff == -1.5);
  REQUIRE(h.terms()[0].str.is_phase_free());
}

TEST_CASE("compress drops cancelled terms", "[pauli]") {
  PauliSum h(2);
  h.add(1.0, avqds::parse_pauli("X0", 2));
  h.add(0.25, avqds::parse_pauli("Z1", 2));
  h.add(-1.0, avqds::parse_pauli("X0", 2));
  h.compress();
  REQUIRE(h.size() == 1);
  REQUIRE(h.terms()[0].str == avqds::parse_pauli("Z1", 2));
  REQUIRE(h.coefficient(avqds::parse_pauli("X0", 2)) == 0.0);
  REQUIRE(h.coefficient(avqds::parse_pauli("Z1", 2)) == 0.25);
}

TEST_CASE("square of anticommuting pair is scalar", "[pauli]") {
  PauliSum h(1);
  h.add(1.0, avqds::parse_pauli("X0", 1));
  h.add(1.0, avqds::parse_pauli("Z0", 1));
  const PauliSum sq = avqds::square(h);
  REQUIRE(sq.size() == 1);
  REQUIRE(sq.terms()[0].str.is_identity());
  REQUIRE(sq.terms()[0].coeff == Catch::Approx(2.0));
}

TEST_CASE("square keeps commuting cross terms", "[pauli]") {
  PauliSum h(2);
  h.add(1.0, avqds::parse_pauli("X0", 2));
  h.add(1.0, avqds::parse_pauli("X1", 2));
  const PauliSum sq = avqds::square(h);
  REQUIRE(sq.size() == 2);
  REQUIRE(sq.coefficient(avqds::PauliString(2)) == Catch::Approx(2.0));
  REQUIRE(sq.coefficient(avqds::parse_pauli("X0 X1", 2)) == Catch::Approx(2.0));
}

TEST_CASE("square matches dense oracle on random sums", "[pauli]") {
  std::mt19937_64 rng{7};
  for (int trial = 0; trial < 40; ++trial) {
    const PauliSum h = oracle::random_sum(3, 6, rng);
    const Eigen::MatrixXcd dense = oracle::dense_sum(h);
    const Eigen::MatrixXcd dense_sq = oracle::dense_sum(avqds::square(h));
    REQUIRE((dense_sq - dense * dense).norm() < 1e-10);
  }
}

TEST_CASE("squared-sum cache tracks coefficient changes", "[pauli]") {
  std::mt19937_64 rng{11};
  const PauliSum structure = oracle::random_sum(3, 5, rng);
  avqds::SquaredSumCache cache(structure);
  REQUIRE(cache.matches(structure));

  PauliSum rescaled(3);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (const auto& t : structure.terms()) rescaled.add(c(rng), t.str);
  REQUIRE(cache.matches(rescaled));

  const PauliSum via_cache = cache.refresh(rescaled);
  const Eigen::MatrixXcd dense = oracle::dense_sum(rescaled);
  REQUIRE((oracle::dense_sum(via_cache) - dense * dense).norm() < 1e-10);

  PauliSum other(3);
  other.add(1.0, avqds::parse_pauli("X0", 3));
  REQUIRE_FALSE(cache.matches(other));
  REQUIRE_THROWS_AS(cache.refresh(other), std::invalid_argument);
}

TEST_CASE("one norm sums magnitudes", "[pauli]") {
  PauliSum h(2);
  h.add(-2.0, avqds::parse_pauli("X0 X1", 2));
  h.add(0.5, avqds::parse_pauli("Z0", 2));
  REQUIRE(h.one_norm() == Catch::Approx(2.5));
}
