#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pqk/cli.hpp"
#include "pqk/dpg.hpp"
#include "pqk/error.hpp"
#include "pqk/serialization.hpp"
#include "support.hpp"

using namespace pqk;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("pqk_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run pqk_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("system documents round trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const dpg::System sys = dpg::generate_random_system({4, 3, seed});
    const io::Json doc = io::system_to_json(sys);
    const dpg::System back = io::system_from_json(doc);
    CHECK(io::system_to_json(back).dump() == doc.dump());
    REQUIRE(back.labels.size() == sys.labels.size());
    for (std::size_t i = 0; i < sys.order.size(); ++i) {
      CHECK(back.order[i].witness.combos == sys.order[i].witness.combos);
      CHECK(back.order[i].witness.op_membership == sys.order[i].witness.op_membership);
    }
  }
}

TEST_CASE("state documents round trip bit for bit") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const io::StateDocument doc{"L", random_mixture(3, 3, seed)};
    const io::StateDocument back = io::state_from_json(io::Json::parse(io::state_to_json(doc).dump()));
    CHECK(back.label == "L");
    REQUIRE(back.state.terms.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& a = doc.state.terms[t];
      const auto& b = back.state.terms[t];
      CHECK(a.weight == b.weight);
      CHECK(a.kernel.logw == b.kernel.logw);
      CHECK(a.kernel.P == b.kernel.P);
      CHECK(a.kernel.R == b.kernel.R);
      CHECK(a.kernel.s == b.kernel.s);
    }
  }
}

TEST_CASE("AP vectors and projections round trip") {
  APVector v(ReducedFrame{"k1", "k2"});
  v.add({Rational(1, 3), -2}, ComplexRational(Rational(5, 7), -1));
  CHECK(io::ap_from_json(io::ap_to_json(v)) == v);
  CoefficientMap combos{{DofId{"k"}, {1, Rational(-1, 2)}}};
  const auto b = build_projection(ReducedFrame{"k"}, ReducedFrame{"q1", "q2"}, combos);
  const auto back = io::projection_from_json(io::projection_to_json(b));
  CHECK(back.entries == b.entries);
  CHECK(back.source == b.source);
}

TEST_CASE("malformed documents name the field") {
  auto message = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedInput);
      return e.what();
    }
    FAIL("expected MalformedInput");
    return {};
  };
  io::Json sys = io::system_to_json(dpg::generate_random_system({2, 2, 1}));
  io::Json broken = sys;
  broken["faces"][0]["incidence"][0]["value"] = "1/x";
  CHECK(message([&] { io::system_from_json(broken); }).find("faces[0].incidence[0].value") != std::string::npos);
  broken = sys;
  broken["labels"][0]["graph"][0] = "nope";
  CHECK(message([&] { io::system_from_json(broken); }).find("nope") != std::string::npos);
  broken = sys;
  broken.erase("edges");
  CHECK(message([&] { io::system_from_json(broken); }).find("edges") != std::string::npos);

  io::Json st = io::state_to_json({"L", random_mixture(2, 1, 3)});
  io::Json bad = st;
  bad["terms"][0]["P"][0][1] = io::Json::array({9.0, 0.0});
  CHECK(message([&] { io::state_from_json(bad); }).find("terms[0].P") != std::string::npos);
  bad = st;
  bad["terms"][0]["weight"] = -1.0;
  CHECK(message([&] { io::state_from_json(bad); }).find("terms[0].weight") != std::string::npos);
  bad = st;
  bad["terms"][0]["R"][0][0] = io::Json::array({50.0, 0.0});
  CHECK(message([&] { io::state_from_json(bad); }).find("terms[0]") != std::string::npos);
}

TEST_CASE("cli: generate, verify, consistency") {
  Scratch tmp;
  const Run demo = pqk_run({"dpg-demo", "--edges", "3", "--depth", "2", "--seed", "7", "--out", tmp / "s.json"});
  REQUIRE(demo.code == 0);
  const Run verify = pqk_run({"verify", tmp / "s.json", "--report", tmp / "r.json"});
  CHECK(verify.code == 0);
  CHECK(io::Json::parse(verify.out)["pass"] == true);
  CHECK(slurp(tmp / "r.json") == verify.out);
  // Determinism of the report.
  CHECK(pqk_run({"verify", tmp / "s.json"}).out == verify.out);

  REQUIRE(pqk_run({"dpg-demo", "--edges", "5", "--depth", "3", "--seed", "2", "--out", tmp / "s3.json",
                   "--state-out", tmp / "st3.json"})
              .code == 0);
  const Run cons = pqk_run({"consistency", "--system", tmp / "s3.json", "--state", tmp / "st3.json", "--chain",
                            "L3,L2,L1_0"});
  CHECK(cons.code == 0);
  CHECK(io::Json::parse(cons.out)["max_distance"].get<double>() <= 1e-9);
}

TEST_CASE("cli: project, oracle and order violations") {
  Scratch tmp;
  REQUIRE(pqk_run({"dpg-demo", "--edges", "2", "--depth", "2", "--seed", "3", "--out", tmp / "s.json", "--state-out",
                   tmp / "st.json"})
              .code == 0);
  const Run ok = pqk_run({"project", "--system", tmp / "s.json", "--state", tmp / "st.json", "--from", "L2", "--to",
                          "L1_1", "--out", tmp / "p.json"});
  CHECK(ok.code == 0);
  const auto projected = io::state_from_json(io::read_json_file(tmp / "p.json"));
  CHECK(projected.label == "L1_1");
  CHECK(std::abs(trace(projected.state) - 1.0) < 1e-9);

  const Run wrong = pqk_run({"project", "--system", tmp / "s.json", "--state", tmp / "p.json", "--from", "L1_1",
                             "--to", "L2", "--out", tmp / "x.json"});
  CHECK(wrong.code == 1);
  CHECK(wrong.err.find("OrderViolation") != std::string::npos);

  const Run oracle = pqk_run({"oracle", "--system", tmp / "s.json", "--state", tmp / "st.json", "--from", "L2",
                              "--to", "L1_0", "--grid", "64", "--extent", "8.0"});
  CHECK(oracle.code == 0);
  CHECK(io::Json::parse(oracle.out)["max_relative_error"].get<double>() <= 1e-4);

  const Run mislabeled = pqk_run({"project", "--system", tmp / "s.json", "--state", tmp / "st.json", "--from",
                                  "L1_0", "--to", "L1_0", "--out", tmp / "y.json"});
  CHECK(mislabeled.code == 2);
  CHECK(mislabeled.err.find("label") != std::string::npos);
}

TEST_CASE("cli: join adds an upper bound that verifies") {
  Scratch tmp;
  REQUIRE(pqk_run({"dpg-demo", "--depth", "2", "--seed", "9", "--out", tmp / "s.json"}).code == 0);
  const Run join = pqk_run({"join", "--system", tmp / "s.json", "--labels", "L1_0,L1_1", "--out", tmp / "j.json",
                            "--id", "J"});
  REQUIRE(join.code == 0);
  CHECK(io::Json::parse(join.out)["det_G"] == "1");
  const auto sys = io::system_from_json(io::read_json_file(tmp / "j.json"));
  CHECK(sys.has_label("J"));
  CHECK(pqk_run({"verify", tmp / "j.json"}).code == 0);
  CHECK(pqk_run({"join", "--system", tmp / "s.json", "--labels", "L1_0,nope", "--out", tmp / "k.json"}).code == 2);
}

TEST_CASE("cli: defects flip verify to failure") {
  Scratch tmp;
  REQUIRE(pqk_run({"dpg-demo", "--depth", "2", "--seed", "4", "--out", tmp / "s.json"}).code == 0);
  io::Json doc = io::read_json_file(tmp / "s.json");
  // Duplicate the first flux operator of the first label: G becomes singular.
  auto& basis = doc["labels"][0]["flux_basis"];
  if (basis.size() > 1) {
    basis[1] = basis[0];
  } else {
    basis[0] = io::Json{{"id", "zero"}, {"faces", io::Json::object()}};
  }
  io::write_json_file(tmp / "bad.json", doc);
  const Run r = pqk_run({"verify", tmp / "bad.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Assumption 4 (nondegenerate G)") != std::string::npos);
}

TEST_CASE("cli: malformed input and usage errors exit 2") {
  Scratch tmp;
  write(tmp / "bad.json", R"({"atomic_edges": [{"id": "a", "source": "x"}], "edges": [], "faces": [], "labels": []})");
  const Run r = pqk_run({"verify", tmp / "bad.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("atomic_edges[0].target") != std::string::npos);
  write(tmp / "junk.json", "{not json");
  CHECK(pqk_run({"verify", tmp / "junk.json"}).code == 2);
  CHECK(pqk_run({"verify"}).code == 2);
  CHECK(pqk_run({"frobnicate"}).code == 2);
  CHECK(pqk_run({"--help"}).code == 0);
}

TEST_CASE("cli: PQK_SEED overrides --seed") {
  Scratch tmp;
  ::setenv("PQK_SEED", "5", 1);
  const Run a = pqk_run({"dpg-demo", "--seed", "1"});
  ::unsetenv("PQK_SEED");
  const Run b = pqk_run({"dpg-demo", "--seed", "5"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != pqk_run({"dpg-demo", "--seed", "1"}).out);
  ::setenv("PQK_SEED", "x", 1);
  CHECK(pqk_run({"dpg-demo"}).code == 2);
  ::unsetenv("PQK_SEED");
}

TEST_CASE("cli: almost periodic operations") {
  Scratch tmp;
  APVector v(ReducedFrame{"k"});
  v.add({1}, ComplexRational(2)).add({Rational(1, 2)}, ComplexRational(0, 1));
  const APVector e = APVector::exponential(ReducedFrame{"k"}, {Rational(1, 2)});
  io::write_json_file(tmp / "v.json", io::ap_to_json(v));
  io::write_json_file(tmp / "e.json", io::ap_to_json(e));
  const auto b = build_projection(ReducedFrame{"k"}, ReducedFrame{"q1", "q2"}, {{DofId{"k"}, {1, 1}}});
  io::write_json_file(tmp / "b.json", io::projection_to_json(b));
  const auto id2 = build_projection(ReducedFrame{"q1", "q2"}, ReducedFrame{"q1", "q2"},
                                    {{DofId{"q1"}, {1, 0}}, {DofId{"q2"}, {0, 1}}});
  io::write_json_file(tmp / "id2.json", io::projection_to_json(id2));

  const Run inner = pqk_run({"ap", "--op", "inner", "--in", tmp / "v.json", tmp / "e.json"});
  CHECK(inner.code == 0);
  CHECK(io::Json::parse(inner.out)["inner"] == io::Json::array({"0", "-1"}));

  const Run up = pqk_run({"ap", "--op", "promote", "--in", tmp / "v.json", tmp / "b.json"});
  REQUIRE(up.code == 0);
  write(tmp / "up.json", up.out);
  CHECK(io::ap_from_json(io::Json::parse(up.out)) == promote(v, b));

  CHECK(pqk_run({"ap", "--op", "limit-equal", "--in", tmp / "v.json", tmp / "up.json", tmp / "b.json",
                 tmp / "id2.json"})
            .code == 0);
  CHECK(pqk_run({"ap", "--op", "limit-equal", "--in", tmp / "e.json", tmp / "up.json", tmp / "b.json",
                 tmp / "id2.json"})
            .code == 1);
  CHECK(pqk_run({"ap", "--op", "inner", "--in", tmp / "v.json", tmp / "up.json"}).code == 2);
}
