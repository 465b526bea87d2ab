#include <doctest.h>

#include <set>

#include "pqk/dpg.hpp"
#include "pqk/error.hpp"
#include "support.hpp"

using namespace pqk;
using namespace pqk::dpg;

namespace {

EdgeWord word(std::string id, std::vector<std::pair<std::string, int>> letters) {
  EdgeWord e{std::move(id), {}};
  for (auto& [a, s] : letters) e.letters.push_back(Letter{a, s});
  return e;
}

std::set<std::string> support(const Graph& g) {
  const auto atoms = g.atoms();
  return {atoms.begin(), atoms.end()};
}

Rational half(int n) {
  Rational r(n, 2);
  r.canonicalize();
  return r;
}

TestConnection random_connection(test::Rng& rng, const std::vector<std::string>& atoms) {
  TestConnection A;
  for (const auto& a : atoms) A.values[a] = rng.rational(5, 4);
  return A;
}

// Atoms a → b → c → d along one strand, x branching off the end of a.
System path_universe() {
  System sys;
  sys.atoms = {{"a", "n0", "n1"}, {"b", "n1", "n2"}, {"c", "n2", "n3"}, {"d", "n3", "n4"}, {"x", "n1", "m"}};
  return sys;
}

}  // namespace

TEST_CASE("holonomy laws") {
  test::Rng rng(31);
  const std::vector<std::string> atoms{"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto A = random_connection(rng, atoms);
    const EdgeWord e1 = word("e1", {{"a", rng.coin() ? 1 : -1}, {"b", 1}});
    const EdgeWord e2 = word("e2", {{"c", rng.coin() ? 1 : -1}});
    CHECK(holonomy(e1.inverse(), A) == -holonomy(e1, A));
    EdgeWord composed{"e21", e1.letters};
    composed.letters.insert(composed.letters.end(), e2.letters.begin(), e2.letters.end());
    CHECK(holonomy(composed, A) == holonomy(e1, A) + holonomy(e2, A));
  }
  TestConnection A;
  A.values["a"] = Rational(5, 2);
  CHECK(holonomy(word("e", {{"a", 1}}), A) == Rational(5, 2));
}

TEST_CASE("witness_connection examples") {
  const Graph g{{word("e1", {{"a", 1}, {"b", 1}}), word("e2", {{"c", 1}})}};
  const auto A = witness_connection(g, {1, -3});
  CHECK(holonomy(g.edges[0], A) == 1);
  CHECK(holonomy(g.edges[1], A) == -3);

  const auto zero = witness_connection(g, {0, 0});
  for (const auto& [atom, v] : zero.values) CHECK(v == 0);

  const Graph back{{word("e", {{"d", -1}, {"c", -1}})}};
  const auto B = witness_connection(back, {1});
  CHECK(B.values.at("d") == -1);
  CHECK(holonomy(back.edges[0], B) == 1);
  CHECK_THROWS_AS(witness_connection(g, {1}), Error);
}

TEST_CASE("epsilon prescription") {
  const Face inside{"S", {{"a", 0}}};
  CHECK(epsilon(inside, word("e", {{"a", 1}})) == 0);
  const Face through{"S", {{"a", 1}}};
  CHECK(epsilon(through, word("e", {{"a", 1}})) == 1);
  CHECK(epsilon(through, word("e", {{"a", -1}})) == -1);
  // Two endpoint touches of ½ add to a full puncture.
  const Face halves{"S", {{"a", Rational(1, 2)}, {"b", Rational(1, 2)}}};
  CHECK(epsilon(halves, word("e", {{"a", 1}, {"b", 1}})) == 1);
}

TEST_CASE("property: epsilon flips under inversion, exhaustive over small words") {
  const std::vector<std::string> atoms{"a", "b", "c"};
  const std::vector<Rational> alphabet{-1, Rational(-1, 2), 0, Rational(1, 2), 1};
  std::vector<EdgeWord> words;
  for (const auto& x : atoms)
    for (int sx : {1, -1}) {
      words.push_back(word("w", {{x, sx}}));
      for (const auto& y : atoms)
        if (y != x)
          for (int sy : {1, -1}) words.push_back(word("w", {{x, sx}, {y, sy}}));
    }
  std::size_t checked = 0;
  for (const auto& ia : alphabet)
    for (const auto& ib : alphabet)
      for (const auto& ic : alphabet) {
        const Face s{"S", {{"a", ia}, {"b", ib}, {"c", ic}}};
        for (const auto& w : words) {
          const Rational e = epsilon(s, w);
          CHECK(epsilon(s, w.inverse()) == -e);
          CHECK(Rational(2 * e).get_den() == 1);
          ++checked;
        }
      }
  CHECK(checked == 125 * 30);
}

TEST_CASE("flux operators") {
  const Graph g{{word("e1", {{"a", 1}, {"b", 1}}), word("e2", {{"c", -1}}), word("e3", {{"d", 1}})}};
  const auto dual = dual_flux_basis(g);
  REQUIRE(dual.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto op = flux_operator(dual[j], g);
    for (std::size_t i = 0; i < 3; ++i) CHECK(op.on(DofId{g.edges[i].id}) == (i == j ? 1 : 0));
  }
  // Reversed edge: the dual face carries the flipped sign.
  CHECK(dual[1].incidence.at("c") == -1);

  const auto empty = flux_operator(Face{"S0", {}}, g);
  for (const auto& e : g.edges) CHECK(empty.on(DofId{e.id}) == 0);

  test::Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    Face s1{"S1", {}}, s2{"S2", {}}, sum{"S12", {}};
    for (const char* a : {"a", "b", "c", "d"}) {
      s1.incidence[a] = half(rng.uniform(-2, 2));
      s2.incidence[a] = half(rng.uniform(-2, 2));
      sum.incidence[a] = s1.incidence[a] + s2.incidence[a];
    }
    for (const auto& e : g.edges) {
      const DofId d{e.id};
      CHECK(flux_operator(sum, g).on(d) == flux_operator(s1, g).on(d) + flux_operator(s2, g).on(d));
    }
  }
}

TEST_CASE("dual basis of a loop") {
  System sys;
  sys.atoms = {{"l", "p", "p", true}};
  sys.edges = {word("loop", {{"l", 1}})};
  const Graph g{sys.edges};
  const auto dual = dual_flux_basis(g);
  REQUIRE(dual.size() == 1);
  CHECK(flux_operator(dual[0], g).on(DofId{"loop"}) == 1);
  CHECK_NOTHROW(sys.validate());
  sys.atoms[0].loop = false;
  CHECK_THROWS_AS(sys.validate(), Error);
}

TEST_CASE("graph_geq examples") {
  const EdgeWord e1 = word("e1", {{"a", 1}}), e2 = word("e2", {{"b", 1}});
  const Graph fine{{e1, e2}};
  const Graph coarse{{word("e21", {{"a", 1}, {"b", 1}})}};
  const auto ord = graph_geq(fine, coarse);
  REQUIRE(ord.accepted);
  CHECK(ord.factorization[0] == std::vector<std::pair<std::string, int>>{{"e1", 1}, {"e2", 1}});
  CHECK_FALSE(graph_geq(coarse, fine).accepted);

  const Graph reversed{{word("r", {{"b", -1}, {"a", -1}})}};
  const auto rev = graph_geq(fine, reversed);
  REQUIRE(rev.accepted);
  CHECK(rev.factorization[0] == std::vector<std::pair<std::string, int>>{{"e2", -1}, {"e1", -1}});

  const Graph other{{word("e3", {{"c", 1}})}};
  const auto refused = graph_geq(fine, other);
  CHECK_FALSE(refused.accepted);
  CHECK(refused.refused_edge == "e3");
}

TEST_CASE("graph_join examples") {
  const Graph ab{{word("ab", {{"a", 1}, {"b", 1}})}};
  const Graph ax{{word("ax", {{"a", 1}, {"x", 1}})}};
  const Graph j = graph_join(ab, ax);
  std::set<std::string> ids;
  for (const auto& e : j.edges) ids.insert(e.id);
  CHECK(ids == std::set<std::string>{"e(a)", "e(b)", "e(x)"});
  CHECK(graph_geq(j, ab).accepted);
  CHECK(graph_geq(j, ax).accepted);

  const Graph self = graph_join(ab, ab);
  REQUIRE(self.edges.size() == 1);
  CHECK(self.edges[0].id == "ab");

  const Graph cd{{word("cd", {{"c", 1}, {"d", 1}})}};
  const Graph u = graph_join(ab, cd);
  REQUIRE(u.edges.size() == 2);
  CHECK(u.edges[0].id == "ab");
  CHECK(u.edges[1].id == "cd");
}

TEST_CASE("property: graph order agrees with witnessed combinations on generated systems") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const System sys = generate_random_system({static_cast<std::size_t>(1 + seed % 5), 3, seed});
    const auto basis = evaluation_basis(sys);
    for (const auto& up : sys.labels)
      for (const auto& lo : sys.labels) {
        const Graph gu = sys.graph(up), gl = sys.graph(lo);
        const auto ord = graph_geq(gu, gl);
        const RationalMatrix frame_t = basis.frame_profiles(to_system_label(sys, up).frame).transpose();
        bool combos = true;
        for (const auto& e : gl.edges) combos = combos && solve(frame_t, basis.profile(DofId{e.id})).has_value();
        CHECK(ord.accepted == combos);
        if (!ord.accepted) continue;
        // Factorization → ±1 coefficients, verified against the evaluation basis.
        const auto su = to_system_label(sys, up), sl = to_system_label(sys, lo);
        OrderWitness w;
        for (std::size_t i = 0; i < gl.edges.size(); ++i) {
          std::vector<Rational> c(gu.edges.size(), Rational(0));
          for (const auto& [id, sign] : ord.factorization[i]) {
            const auto pos = std::find(up.graph.begin(), up.graph.end(), id) - up.graph.begin();
            c[static_cast<std::size_t>(pos)] += sign;
          }
          w.combos[DofId{gl.edges[i].id}] = c;
        }
        CHECK(relation_geq(su, sl, w, basis).combos_ok);
      }
  }
}

TEST_CASE("property: graph_join is an upper bound with the union support") {
  test::Rng rng(33);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const System sys = generate_random_system({static_cast<std::size_t>(1 + seed % 5), 3, seed});
    for (const auto& a : sys.labels)
      for (const auto& b : sys.labels) {
        const Graph ga = sys.graph(a), gb = sys.graph(b);
        const Graph j = graph_join(ga, gb);
        CHECK(graph_geq(j, ga).accepted);
        CHECK(graph_geq(j, gb).accepted);
        std::set<std::string> both = support(ga);
        for (const auto& x : support(gb)) both.insert(x);
        CHECK(support(j) == both);
        CHECK(j.atoms().size() == both.size());  // still pairwise disjoint
      }
  }
}

TEST_CASE("property: dual basis always gives the identity") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const System sys = generate_random_system({5, 2, seed});
    for (const auto& l : sys.labels) {
      const Graph g = sys.graph(l);
      SystemLabel sl{l.id, {}, to_system_label(sys, l).frame};
      for (const auto& f : dual_flux_basis(g)) sl.ops.push_back(flux_operator(f, g));
      CHECK(g_matrix(sl).entries.is_identity());
    }
  }
}

TEST_CASE("lambda_join examples") {
  SUBCASE("join with itself") {
    System sys = generate_random_system({3, 1, 2});
    const Label l = sys.labels[0];
    const Label j = lambda_join(sys, l, l, "J");
    sys.labels.push_back(j);
    const auto basis = evaluation_basis(sys);
    const auto sj = to_system_label(sys, j), sl = to_system_label(sys, l);
    CHECK(determinant(g_matrix(sj).entries) == 1);
    const auto w = derive_order_witness(sj, sl, basis);
    REQUIRE(w);
    CHECK(relation_geq(sj, sl, *w, basis));
  }
  SUBCASE("two single-edge labels on disjoint atoms") {
    System sys = path_universe();
    sys.edges = {word("ea", {{"a", 1}}), word("ec", {{"c", 1}})};
    sys.faces = {{"Sa", {{"a", 1}}}, {"Sc", {{"c", 1}}}};
    sys.labels = {{"A", {"ea"}, {{"Sa", {{"Sa", 1}}}}}, {"C", {"ec"}, {{"Sc", {{"Sc", 1}}}}}};
    const Label j = lambda_join(sys, sys.labels[0], sys.labels[1], "AC");
    sys.labels.push_back(j);
    CHECK_NOTHROW(sys.validate());
    CHECK(j.graph.size() == 2);
    CHECK(g_matrix(to_system_label(sys, j)).entries.is_identity());
  }
}

TEST_CASE("property: lambda_join emits G = [[I, G'], [0, I]] with det 1") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const System sys = generate_random_system({static_cast<std::size_t>(1 + seed % 5), 3, seed});
    const auto basis = evaluation_basis(sys);
    for (const char* id : {"L2", "L3"}) {
      const Label& l = sys.label(id);
      const RationalMatrix g = g_matrix(to_system_label(sys, l)).entries;
      // m = rank of the inputs' joint operators = number of ".f" combos
      std::size_t m = 0;
      for (const auto& c : l.flux_basis) m += c.id.rfind(std::string(id) + ".f", 0) == 0 ? 1 : 0;
      const std::size_t n = g.rows();
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
          if (r < m && c < m) CHECK(g(r, c) == (r == c ? 1 : 0));
          if (r >= m && c < m) CHECK(g(r, c) == 0);
          if (r >= m && c >= m) CHECK(g(r, c) == (r == c ? 1 : 0));
        }
      CHECK(determinant(g) == 1);
      CHECK(test::cofactor_det(g) == 1);
    }
    const auto top = to_system_label(sys, sys.label("L2"));
    for (const char* lower : {"L1_0", "L1_1"}) {
      const auto w = derive_order_witness(top, to_system_label(sys, sys.label(lower)), basis);
      CHECK(w.has_value());
    }
  }
}

TEST_CASE("generator") {
  const System one = generate_random_system({1, 1, 4});
  REQUIRE(one.labels.size() == 1);
  CHECK(g_matrix(to_system_label(one, one.labels[0])).entries.is_identity());

  const System sys = generate_random_system({3, 2, 7});
  CHECK(sys.labels.size() >= 3);
  CHECK_NOTHROW(sys.validate());
  for (std::size_t i = 0; i < sys.labels.size(); ++i)
    for (std::size_t j = i + 1; j < sys.labels.size(); ++j) {
      const auto& p = sys.probes.joins;
      CHECK(std::find(p.begin(), p.end(), std::make_pair(sys.labels[i].id, sys.labels[j].id)) != p.end());
    }
  CHECK(generated_chain(generate_random_system({3, 3, 1})) == std::vector<std::string>{"L3", "L2", "L1_0"});

  const System again = generate_random_system({3, 2, 7});
  REQUIRE(again.labels.size() == sys.labels.size());
  for (std::size_t i = 0; i < sys.labels.size(); ++i) {
    CHECK(again.labels[i].graph == sys.labels[i].graph);
    CHECK(again.labels[i].flux_basis.size() == sys.labels[i].flux_basis.size());
  }
  CHECK(again.edges.size() == sys.edges.size());
  CHECK_THROWS_AS(generate_random_system({0, 2, 1}), Error);
}

TEST_CASE("validation names the offending entry") {
  System sys = path_universe();
  sys.edges = {word("bad", {{"a", 1}, {"c", 1}})};  // a ends at n1, c starts at n2
  try {
    sys.validate();
    FAIL("expected MalformedInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedInput);
    CHECK(std::string(e.what()).find("edges.bad") != std::string::npos);
  }
  sys.edges = {word("ab", {{"a", 1}, {"b", 1}}), word("b", {{"b", 1}})};
  sys.labels = {{"L", {"ab", "b"}, {}}};
  CHECK_THROWS_AS(sys.validate(), Error);
}
