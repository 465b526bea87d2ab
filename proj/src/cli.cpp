#include "pqk/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <optional>
#include <sstream>

#include "pqk/dpg.hpp"
#include "pqk/error.hpp"
#include "pqk/gaussian_states.hpp"
#include "pqk/serialization.hpp"

namespace pqk::cli {

namespace {

using io::Json;

constexpr double kOracleTolerance = 1e-4;

ExitCode exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::FrameMismatch:
      return kMalformed;
    default:
      return kFail;
  }
}

void emit(std::ostream& out, const Json& report) { out << report.dump(2) << '\n'; }

const SystemLabel& find_label(const std::vector<SystemLabel>& labels, const std::string& id, const char* flag) {
  for (const auto& l : labels)
    if (l.id == id) return l;
  throw Error(ErrorCode::MalformedInput, std::string(flag) + ": unknown label '" + id + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

// Declared witness if there is one, else an exactly derived one.
std::optional<OrderWitness> witness_for(const dpg::System& sys, const SystemLabel& upper, const SystemLabel& lower,
                                        const EvaluationBasis& basis) {
  if (upper.id == lower.id) return identity_witness(upper);
  for (const auto& rel : sys.order)
    if (rel.upper == upper.id && rel.lower == lower.id) return rel.witness;
  return derive_order_witness(upper, lower, basis);
}

OrderWitness require_witness(const dpg::System& sys, const SystemLabel& upper, const SystemLabel& lower,
                             const EvaluationBasis& basis) {
  auto w = witness_for(sys, upper, lower, basis);
  if (!w) throw Error(ErrorCode::OrderViolation, "'" + upper.id + "' is not >= '" + lower.id + "'");
  return *w;
}

io::StateDocument load_state(const std::string& path, const SystemLabel& expected) {
  io::StateDocument doc = io::state_from_json(io::read_json_file(path));
  if (doc.label != expected.id) {
    throw Error(ErrorCode::MalformedInput,
                "field 'label': state lives on '" + doc.label + "', expected '" + expected.id + "'");
  }
  if (doc.state.dim != expected.frame.size()) {
    throw Error(ErrorCode::MalformedInput, "field 'terms': dimension " + std::to_string(doc.state.dim) +
                                               " does not match label '" + expected.id + "' (" +
                                               std::to_string(expected.frame.size()) + ")");
  }
  return doc;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string system;
  std::string report;
};

int do_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const dpg::System sys = io::system_from_json(io::read_json_file(a.system));
  AssumptionProbes probes = dpg::audit_probes(sys);
  // Labels without a declared surjectivity witness get one from witness_connection.
  for (const auto& l : sys.labels) {
    bool declared = false;
    for (const auto& w : probes.surjectivity) declared = declared || w.label == l.id;
    if (!declared) probes.surjectivity.push_back(dpg::surjectivity_witness(sys, l));
  }
  const AssumptionReport report =
      check_assumptions(dpg::system_labels(sys), sys.order, probes, dpg::evaluation_basis(sys));
  const Json doc = io::assumption_report_to_json(report);
  emit(out, doc);
  if (!a.report.empty()) io::write_json_file(a.report, doc);
  for (const auto& c : report.checks)
    if (!c.pass) err << "FAIL " << c.assumption << " [" << c.anchor << "] " << c.subject << ": " << c.detail << '\n';
  return report.passed() ? kPass : kFail;
}

struct ProjectArgs {
  std::string system, state, from, to, out;
};

int do_project(const ProjectArgs& a, std::ostream& out, std::ostream&) {
  const dpg::System sys = io::system_from_json(io::read_json_file(a.system));
  const auto labels = dpg::system_labels(sys);
  const auto basis = dpg::evaluation_basis(sys);
  const SystemLabel& upper = find_label(labels, a.from, "--from");
  const SystemLabel& lower = find_label(labels, a.to, "--to");
  const io::StateDocument doc = load_state(a.state, upper);
  const OrderWitness w = require_witness(sys, upper, lower, basis);
  const ProjectedState projected = project_state(doc.state, upper, lower, w, basis);
  io::write_json_file(a.out, io::state_to_json({lower.id, projected.state}));
  emit(out, Json{{"from", upper.id},
                 {"to", lower.id},
                 {"dim", projected.state.dim},
                 {"terms", projected.state.terms.size()},
                 {"raw_trace", projected.raw_trace},
                 {"out", a.out}});
  return kPass;
}

struct ConsistencyArgs {
  std::string system, state, chain;
  double tol = 1e-9;
};

int do_consistency(const ConsistencyArgs& a, std::ostream& out, std::ostream& err) {
  const dpg::System sys = io::system_from_json(io::read_json_file(a.system));
  const auto labels = dpg::system_labels(sys);
  const auto basis = dpg::evaluation_basis(sys);
  const auto ids = split_list(a.chain);
  if (ids.size() < 3) throw Error(ErrorCode::MalformedInput, "--chain: needs at least three labels");
  std::vector<const SystemLabel*> chain;
  for (const auto& id : ids) chain.push_back(&find_label(labels, id, "--chain"));
  const io::StateDocument doc = load_state(a.state, *chain.front());

  // Project the state down the chain once; every triple i > j > k is then
  // checked from the state living on label i.
  std::vector<GaussianMixtureState> states{doc.state};
  std::vector<OrderWitness> steps;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    steps.push_back(require_witness(sys, *chain[i], *chain[i + 1], basis));
    states.push_back(project_state(states.back(), *chain[i], *chain[i + 1], steps.back(), basis).state);
  }
  Json triples = Json::array();
  bool pass = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    for (std::size_t j = i + 1; j < chain.size(); ++j)
      for (std::size_t k = j + 1; k < chain.size(); ++k) {
        OrderWitness upper_middle = steps[i];
        for (std::size_t m = i + 1; m < j; ++m)
          upper_middle = compose_witnesses(*chain[i], *chain[m], *chain[m + 1], upper_middle, steps[m]);
        OrderWitness middle_lower = steps[j];
        for (std::size_t m = j + 1; m < k; ++m)
          middle_lower = compose_witnesses(*chain[j], *chain[m], *chain[m + 1], middle_lower, steps[m]);
        const ConsistencyReport r =
            verify_consistency(states[i], *chain[i], *chain[j], *chain[k], upper_middle, middle_lower, basis, a.tol);
        pass = pass && r.pass;
        worst = std::max(worst, r.distance);
        triples.push_back(Json{{"top", chain[i]->id},
                               {"middle", chain[j]->id},
                               {"bottom", chain[k]->id},
                               {"distance", r.distance},
                               {"direct_drift", r.direct_drift},
                               {"chained_drift", r.chained_drift},
                               {"pass", r.pass}});
        if (!r.pass) {
          err << "FAIL consistency " << chain[i]->id << " >= " << chain[j]->id << " >= " << chain[k]->id
              << ": distance " << r.distance << " > " << a.tol << '\n';
        }
      }
  emit(out, Json{{"pass", pass}, {"tolerance", a.tol}, {"max_distance", worst}, {"triples", triples}});
  return pass ? kPass : kFail;
}

struct JoinArgs {
  std::string system, labels, out, id;
};

int do_join(const JoinArgs& a, std::ostream& out, std::ostream&) {
  dpg::System sys = io::system_from_json(io::read_json_file(a.system));
  const auto ids = split_list(a.labels);
  if (ids.size() != 2) throw Error(ErrorCode::MalformedInput, "--labels: expected exactly two labels");
  for (const auto& id : ids)
    if (!sys.has_label(id)) throw Error(ErrorCode::MalformedInput, "--labels: unknown label '" + id + "'");
  const std::string id = a.id.empty() ? ids[0] + "v" + ids[1] : a.id;
  if (sys.has_label(id)) throw Error(ErrorCode::MalformedInput, "--id: label '" + id + "' already exists");

  const dpg::Label joined = dpg::lambda_join(sys, sys.label(ids[0]), sys.label(ids[1]), id);
  sys.labels.push_back(joined);

  // Relations touching the new label; declared ones are kept as they are.
  const auto basis = dpg::evaluation_basis(sys);
  const auto labels = dpg::system_labels(sys);
  const SystemLabel& top = labels.back();
  Json relations = Json::array();
  for (const auto& other : labels) {
    if (other.id == top.id) continue;
    if (auto w = derive_order_witness(top, other, basis)) {
      sys.order.push_back({top.id, other.id, std::move(*w)});
      relations.push_back(Json::array({top.id, other.id}));
    }
    if (auto w = derive_order_witness(other, top, basis)) {
      sys.order.push_back({other.id, top.id, std::move(*w)});
      relations.push_back(Json::array({other.id, top.id}));
    }
  }
  sys.probes.joins.emplace_back(ids[0], ids[1]);
  sys.probes.surjectivity.push_back(dpg::surjectivity_witness(sys, joined));
  sys.validate();
  io::write_json_file(a.out, io::system_to_json(sys));

  const RationalMatrix g = g_matrix(top).entries;
  emit(out, Json{{"label", id},
                 {"graph", joined.graph},
                 {"dim", top.frame.size()},
                 {"det_G", format_rational(determinant(g))},
                 {"relations", relations},
                 {"out", a.out}});
  return kPass;
}

struct OracleArgs {
  std::string system, state, from, to;
  std::size_t grid = 64;
  double extent = 8.0;
};

int do_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err) {
  const dpg::System sys = io::system_from_json(io::read_json_file(a.system));
  const auto labels = dpg::system_labels(sys);
  const auto basis = dpg::evaluation_basis(sys);
  const SystemLabel& upper = find_label(labels, a.from, "--from");
  const SystemLabel& lower = find_label(labels, a.to, "--to");
  const io::StateDocument doc = load_state(a.state, upper);
  const OrderWitness w = require_witness(sys, upper, lower, basis);
  const TraceGeometry geometry = trace_geometry(upper, lower, w, basis);
  const OracleComparison cmp = compare_with_oracle(doc.state, geometry, a.grid, a.extent);
  const bool pass = cmp.max_relative_error <= kOracleTolerance;
  emit(out, Json{{"from", upper.id},
                 {"to", lower.id},
                 {"traced_dims", geometry.kernel_basis.cols()},
                 {"grid", a.grid},
                 {"extent", a.extent},
                 {"samples", cmp.samples},
                 {"max_relative_error", cmp.max_relative_error},
                 {"tolerance", kOracleTolerance},
                 {"pass", pass}});
  if (!pass) err << "FAIL oracle: relative error " << cmp.max_relative_error << " > " << kOracleTolerance << '\n';
  return pass ? kPass : kFail;
}

struct DemoArgs {
  std::size_t edges = 3;
  std::size_t depth = 2;
  std::uint64_t seed = 0;
  std::string out, state_out;
};

int do_demo(DemoArgs a, std::ostream& out, std::ostream&) {
  if (const char* env = std::getenv("PQK_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      a.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedInput, std::string("PQK_SEED: not an unsigned integer: '") + env + "'");
    }
  }
  const dpg::System sys = dpg::generate_random_system({a.edges, a.depth, a.seed});
  const Json doc = io::system_to_json(sys);
  const auto chain = dpg::generated_chain(sys);
  if (a.out.empty()) {
    emit(out, doc);
  } else {
    io::write_json_file(a.out, doc);
  }
  if (!a.state_out.empty()) {
    const dpg::Label& top = sys.label(chain.front());
    io::write_json_file(a.state_out, io::state_to_json({top.id, random_mixture(top.graph.size(), 3, a.seed)}));
  }
  if (!a.out.empty()) {
    Json labels = Json::array();
    for (const auto& l : sys.labels) labels.push_back(Json{{"id", l.id}, {"dim", l.graph.size()}});
    emit(out, Json{{"seed", a.seed}, {"labels", labels}, {"chain", chain}, {"relations", sys.order.size()}});
  }
  return kPass;
}

struct ApArgs {
  std::string op;
  std::vector<std::string> inputs;
};

int do_ap(const ApArgs& a, std::ostream& out, std::ostream&) {
  auto need = [&](std::size_t n, const char* shape) {
    if (a.inputs.size() != n) throw Error(ErrorCode::MalformedInput, "--in: '" + a.op + "' expects " + shape);
  };
  if (a.op == "inner") {
    need(2, "a.json b.json");
    const APVector v = io::ap_from_json(io::read_json_file(a.inputs[0]));
    const APVector w = io::ap_from_json(io::read_json_file(a.inputs[1]));
    const ComplexRational z = inner_product(v, w);
    emit(out, Json{{"inner", Json::array({format_rational(z.re), format_rational(z.im)})}});
    return kPass;
  }
  if (a.op == "promote") {
    need(2, "vector.json projection.json");
    const APVector v = io::ap_from_json(io::read_json_file(a.inputs[0]));
    const ProjectionMatrix b = io::projection_from_json(io::read_json_file(a.inputs[1]));
    emit(out, io::ap_to_json(promote(v, b)));
    return kPass;
  }
  // limit-equal
  need(4, "a.json b.json to_a.json to_b.json");
  const APVector v = io::ap_from_json(io::read_json_file(a.inputs[0]));
  const APVector w = io::ap_from_json(io::read_json_file(a.inputs[1]));
  const ProjectionMatrix p = io::projection_from_json(io::read_json_file(a.inputs[2]));
  const ProjectionMatrix q = io::projection_from_json(io::read_json_file(a.inputs[3]));
  const bool equal = limit_equal(v, w, p, q);
  emit(out, Json{{"equal", equal}});
  return equal ? kPass : kFail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projective quantum kinematics toolkit", "pqk"};
  app.require_subcommand(1);

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Audit the assumptions on a system description");
  verify_cmd->add_option("system", verify.system, "system JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--report", verify.report, "also write the JSON report here");

  ProjectArgs project;
  auto* project_cmd = app.add_subcommand("project", "Partial trace of a state from one label to a lower one");
  project_cmd->add_option("--system", project.system)->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--state", project.state)->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--from", project.from)->required();
  project_cmd->add_option("--to", project.to)->required();
  project_cmd->add_option("--out", project.out)->required();

  ConsistencyArgs consistency;
  auto* consistency_cmd = app.add_subcommand("consistency", "Check projections commute along a label chain");
  consistency_cmd->add_option("--system", consistency.system)->required()->check(CLI::ExistingFile);
  consistency_cmd->add_option("--state", consistency.state)->required()->check(CLI::ExistingFile);
  consistency_cmd->add_option("--chain", consistency.chain, "comma-separated, top first")->required();
  consistency_cmd->add_option("--tol", consistency.tol)->capture_default_str()->check(CLI::PositiveNumber);

  JoinArgs join;
  auto* join_cmd = app.add_subcommand("join", "Add a common upper bound of two labels");
  join_cmd->add_option("--system", join.system)->required()->check(CLI::ExistingFile);
  join_cmd->add_option("--labels", join.labels, "A,B")->required();
  join_cmd->add_option("--out", join.out)->required();
  join_cmd->add_option("--id", join.id, "id of the new label (default AvB)");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Compare the closed-form trace with quadrature");
  oracle_cmd->add_option("--system", oracle.system)->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--state", oracle.state)->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--from", oracle.from)->required();
  oracle_cmd->add_option("--to", oracle.to)->required();
  oracle_cmd->add_option("--grid", oracle.grid)->capture_default_str()->check(CLI::Range(16, 4096));
  oracle_cmd->add_option("--extent", oracle.extent)->capture_default_str()->check(CLI::PositiveNumber);

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("dpg-demo", "Generate a random DPG system (PQK_SEED overrides --seed)");
  demo_cmd->add_option("--edges", demo.edges)->capture_default_str()->check(CLI::Range(1, 12));
  demo_cmd->add_option("--depth", demo.depth)->capture_default_str()->check(CLI::Range(1, 8));
  demo_cmd->add_option("--seed", demo.seed)->capture_default_str();
  demo_cmd->add_option("--out", demo.out, "system JSON (stdout if omitted)");
  demo_cmd->add_option("--state-out", demo.state_out, "also write a 3-term mixture on the top label");

  ApArgs ap;
  auto* ap_cmd = app.add_subcommand("ap", "Almost periodic vectors: inner product, promotion, limit equality");
  ap_cmd->add_option("--op", ap.op)->required()->check(CLI::IsMember({"inner", "promote", "limit-equal"}));
  ap_cmd->add_option("--in", ap.inputs, "inner: a b | promote: vector projection | limit-equal: a b to_a to_b")
      ->required()
      ->expected(2, 4)
      ->check(CLI::ExistingFile);

  std::vector<const char*> argv{"pqk"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kMalformed;
  }

  try {
    if (verify_cmd->parsed()) return do_verify(verify, out, err);
    if (project_cmd->parsed()) return do_project(project, out, err);
    if (consistency_cmd->parsed()) return do_consistency(consistency, out, err);
    if (join_cmd->parsed()) return do_join(join, out, err);
    if (oracle_cmd->parsed()) return do_oracle(oracle, out, err);
    if (demo_cmd->parsed()) return do_demo(demo, out, err);
    return do_ap(ap, out, err);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kMalformed;
  }
}

}  // namespace pqk::cli
