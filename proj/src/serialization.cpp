#include "pqk/serialization.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "pqk/error.hpp"

namespace pqk::io {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::MalformedInput, "field '" + path + "': " + why);
}

const Json& req(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string sub(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& arr(const Json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  return j;
}

std::string str(const Json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

Rational rat(const Json& j, const std::string& path) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number_float()) {
      const double d = j.get<double>();
      if (!std::isfinite(d)) bad(path, "not finite");
      return rational_from_double(d);
    }
  } catch (const Error&) {
    bad(path, "not a rational");
  }
  bad(path, "expected a rational string or number");
}

double num(const Json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  const double d = j.get<double>();
  if (!std::isfinite(d)) bad(path, "not finite");
  return d;
}

Complex cplx(const Json& j, const std::string& path) {
  if (j.is_number()) return {num(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) bad(path, "expected [re, im]");
  return {num(j[0], sub(path, 0)), num(j[1], sub(path, 1))};
}

Json rat_json(const Rational& r) { return format_rational(r); }

Json rat_row(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(rat_json(x));
  return out;
}

std::vector<Rational> rat_vector(const Json& j, const std::string& path) {
  std::vector<Rational> out;
  for (std::size_t i = 0; i < arr(j, path).size(); ++i) out.push_back(rat(j[i], sub(path, i)));
  return out;
}

std::vector<std::vector<Rational>> rat_rows(const Json& j, const std::string& path) {
  std::vector<std::vector<Rational>> out;
  for (std::size_t i = 0; i < arr(j, path).size(); ++i) out.push_back(rat_vector(j[i], sub(path, i)));
  return out;
}

std::vector<std::string> str_vector(const Json& j, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr(j, path).size(); ++i) out.push_back(str(j[i], sub(path, i)));
  return out;
}

Json flux_to_json(const dpg::FluxCombo& combo) {
  if (combo.faces.size() == 1 && combo.faces.begin()->first == combo.id && combo.faces.begin()->second == 1) {
    return combo.id;
  }
  Json faces = Json::object();
  for (const auto& [fid, c] : combo.faces) faces[fid] = rat_json(c);
  return Json{{"id", combo.id}, {"faces", faces}};
}

dpg::FluxCombo flux_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string id = j.get<std::string>();
    return {id, {{id, Rational(1)}}};
  }
  dpg::FluxCombo combo{str(req(j, "id", path), sub(path, "id")), {}};
  const Json& faces = req(j, "faces", path);
  if (!faces.is_object()) bad(sub(path, "faces"), "expected an object");
  for (auto it = faces.begin(); it != faces.end(); ++it) {
    combo.faces[it.key()] = rat(it.value(), sub(sub(path, "faces"), it.key()));
  }
  return combo;
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json cmatrix_json(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd cmatrix(const Json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) bad(path, "expected " + std::to_string(n) + " rows");
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != n) bad(sub(path, i), "expected " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cplx(row[k], sub(sub(path, i), k));
    }
  }
  return m;
}

Provenance provenance_from(const std::string& s, const std::string& path) {
  if (s == "pure-projector") return Provenance::PureProjector;
  if (s == "projected") return Provenance::Projected;
  if (s == "mixed") return Provenance::Mixed;
  bad(path, "unknown provenance '" + s + "'");
}

ReducedFrame frame_from(const Json& j, const std::string& path) {
  std::vector<DofId> dofs;
  for (const auto& s : str_vector(j, path)) dofs.push_back(DofId{s});
  try {
    return ReducedFrame(std::move(dofs));
  } catch (const Error& e) {
    bad(path, e.what());
  }
}

Json frame_json(const ReducedFrame& f) {
  Json out = Json::array();
  for (const auto& d : f.dofs()) out.push_back(d.value);
  return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MalformedInput, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

Json system_to_json(const dpg::System& sys) {
  Json doc;
  Json atoms = Json::array();
  for (const auto& a : sys.atoms) {
    Json entry{{"id", a.id}, {"source", a.source}, {"target", a.target}};
    if (a.loop) entry["loop"] = true;
    atoms.push_back(entry);
  }
  doc["atomic_edges"] = atoms;

  Json edges = Json::array();
  for (const auto& e : sys.edges) {
    Json letters = Json::array();
    for (const auto& l : e.letters) letters.push_back(Json{{"atom", l.atom}, {"sign", l.sign}});
    edges.push_back(Json{{"id", e.id}, {"letters", letters}});
  }
  doc["edges"] = edges;

  Json faces = Json::array();
  for (const auto& f : sys.faces) {
    Json inc = Json::array();
    for (const auto& [atom, v] : f.incidence) inc.push_back(Json{{"atom", atom}, {"value", rat_json(v)}});
    faces.push_back(Json{{"id", f.id}, {"incidence", inc}});
  }
  doc["faces"] = faces;

  Json labels = Json::array();
  for (const auto& l : sys.labels) {
    Json basis = Json::array();
    for (const auto& combo : l.flux_basis) basis.push_back(flux_to_json(combo));
    labels.push_back(Json{{"id", l.id}, {"graph", l.graph}, {"flux_basis", basis}});
  }
  doc["labels"] = labels;

  Json order = Json::array();
  for (const auto& rel : sys.order) {
    Json combos = Json::object();
    for (const auto& [dof, c] : rel.witness.combos) combos[dof.value] = rat_row(c);
    Json ops = Json::array();
    for (const auto& row : rel.witness.op_membership) ops.push_back(rat_row(row));
    order.push_back(Json{{"upper", rel.upper}, {"lower", rel.lower}, {"combo_witness", combos}, {"op_witness", ops}});
  }
  doc["order"] = order;

  const auto& p = sys.probes;
  if (!p.dof_sets.empty() || !sys.operator_probes.empty() || !p.surjectivity.empty() || !p.joins.empty()) {
    Json probes;
    Json dof_sets = Json::array();
    for (const auto& set : p.dof_sets) {
      Json ids = Json::array();
      for (const auto& d : set) ids.push_back(d.value);
      dof_sets.push_back(ids);
    }
    probes["dof_sets"] = dof_sets;
    Json op_sets = Json::array();
    for (const auto& set : sys.operator_probes) {
      Json ops = Json::array();
      for (const auto& combo : set) ops.push_back(flux_to_json(combo));
      op_sets.push_back(ops);
    }
    probes["operator_sets"] = op_sets;
    Json surj = Json::array();
    for (const auto& w : p.surjectivity) {
      Json configs = Json::array();
      for (const auto& q : w.configurations) configs.push_back(rat_row(q));
      Json targets = Json::array();
      for (const auto& t : w.targets) targets.push_back(rat_row(t));
      surj.push_back(Json{{"label", w.label}, {"configurations", configs}, {"targets", targets}});
    }
    probes["surjectivity"] = surj;
    Json joins = Json::array();
    for (const auto& [a, b] : p.joins) joins.push_back(Json::array({a, b}));
    probes["joins"] = joins;
    doc["probes"] = probes;
  }
  return doc;
}

dpg::System system_from_json(const Json& doc) {
  dpg::System sys;
  const Json& atoms = arr(req(doc, "atomic_edges", ""), "atomic_edges");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string path = sub("atomic_edges", i);
    dpg::AtomicEdge a{str(req(atoms[i], "id", path), sub(path, "id")),
                      str(req(atoms[i], "source", path), sub(path, "source")),
                      str(req(atoms[i], "target", path), sub(path, "target")), false};
    if (auto it = atoms[i].find("loop"); it != atoms[i].end()) {
      if (!it->is_boolean()) bad(sub(path, "loop"), "expected a boolean");
      a.loop = it->get<bool>();
    }
    sys.atoms.push_back(std::move(a));
  }

  const Json& edges = arr(req(doc, "edges", ""), "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = sub("edges", i);
    dpg::EdgeWord e{str(req(edges[i], "id", path), sub(path, "id")), {}};
    const Json& letters = arr(req(edges[i], "letters", path), sub(path, "letters"));
    for (std::size_t k = 0; k < letters.size(); ++k) {
      const std::string lp = sub(sub(path, "letters"), k);
      const Json& sign = req(letters[k], "sign", lp);
      if (!sign.is_number_integer()) bad(sub(lp, "sign"), "expected +1 or -1");
      e.letters.push_back(dpg::Letter{str(req(letters[k], "atom", lp), sub(lp, "atom")), sign.get<int>()});
    }
    sys.edges.push_back(std::move(e));
  }

  const Json& faces = arr(req(doc, "faces", ""), "faces");
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::string path = sub("faces", i);
    dpg::Face f{str(req(faces[i], "id", path), sub(path, "id")), {}};
    const Json& inc = arr(req(faces[i], "incidence", path), sub(path, "incidence"));
    for (std::size_t k = 0; k < inc.size(); ++k) {
      const std::string ip = sub(sub(path, "incidence"), k);
      const std::string atom = str(req(inc[k], "atom", ip), sub(ip, "atom"));
      if (f.incidence.count(atom)) bad(ip, "atom '" + atom + "' listed twice");
      f.incidence[atom] = rat(req(inc[k], "value", ip), sub(ip, "value"));
    }
    sys.faces.push_back(std::move(f));
  }

  const Json& labels = arr(req(doc, "labels", ""), "labels");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string path = sub("labels", i);
    dpg::Label l{str(req(labels[i], "id", path), sub(path, "id")),
                 str_vector(req(labels[i], "graph", path), sub(path, "graph")), {}};
    const Json& basis = arr(req(labels[i], "flux_basis", path), sub(path, "flux_basis"));
    for (std::size_t k = 0; k < basis.size(); ++k) {
      l.flux_basis.push_back(flux_from_json(basis[k], sub(sub(path, "flux_basis"), k)));
    }
    sys.labels.push_back(std::move(l));
  }

  if (auto it = doc.find("order"); it != doc.end()) {
    const Json& order = arr(*it, "order");
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::string path = sub("order", i);
      OrderRelation rel{str(req(order[i], "upper", path), sub(path, "upper")),
                        str(req(order[i], "lower", path), sub(path, "lower")), {}};
      const Json& combos = req(order[i], "combo_witness", path);
      if (!combos.is_object()) bad(sub(path, "combo_witness"), "expected an object");
      for (auto c = combos.begin(); c != combos.end(); ++c) {
        rel.witness.combos[DofId{c.key()}] = rat_vector(c.value(), sub(sub(path, "combo_witness"), c.key()));
      }
      rel.witness.op_membership = rat_rows(req(order[i], "op_witness", path), sub(path, "op_witness"));
      if (!sys.has_label(rel.upper)) bad(sub(path, "upper"), "unknown label '" + rel.upper + "'");
      if (!sys.has_label(rel.lower)) bad(sub(path, "lower"), "unknown label '" + rel.lower + "'");
      sys.order.push_back(std::move(rel));
    }
  }

  if (auto it = doc.find("probes"); it != doc.end()) {
    const Json& p = *it;
    if (!p.is_object()) bad("probes", "expected an object");
    if (auto d = p.find("dof_sets"); d != p.end()) {
      for (std::size_t i = 0; i < arr(*d, "probes.dof_sets").size(); ++i) {
        std::vector<DofId> set;
        for (const auto& s : str_vector((*d)[i], sub("probes.dof_sets", i))) set.push_back(DofId{s});
        sys.probes.dof_sets.push_back(std::move(set));
      }
    }
    if (auto o = p.find("operator_sets"); o != p.end()) {
      for (std::size_t i = 0; i < arr(*o, "probes.operator_sets").size(); ++i) {
        const std::string path = sub("probes.operator_sets", i);
        std::vector<dpg::FluxCombo> set;
        for (std::size_t k = 0; k < arr((*o)[i], path).size(); ++k) set.push_back(flux_from_json((*o)[i][k], sub(path, k)));
        sys.operator_probes.push_back(std::move(set));
      }
    }
    if (auto s = p.find("surjectivity"); s != p.end()) {
      for (std::size_t i = 0; i < arr(*s, "probes.surjectivity").size(); ++i) {
        const std::string path = sub("probes.surjectivity", i);
        const Json& w = (*s)[i];
        sys.probes.surjectivity.push_back(SurjectivityWitness{
            str(req(w, "label", path), sub(path, "label")),
            rat_rows(req(w, "configurations", path), sub(path, "configurations")),
            rat_rows(req(w, "targets", path), sub(path, "targets"))});
      }
    }
    if (auto j = p.find("joins"); j != p.end()) {
      for (std::size_t i = 0; i < arr(*j, "probes.joins").size(); ++i) {
        const auto pair = str_vector((*j)[i], sub("probes.joins", i));
        if (pair.size() != 2) bad(sub("probes.joins", i), "expected two label ids");
        sys.probes.joins.emplace_back(pair[0], pair[1]);
      }
    }
  }
  sys.validate();
  // Probe d.o.f. must exist in the evaluation universe.
  for (std::size_t i = 0; i < sys.probes.dof_sets.size(); ++i)
    for (const auto& d : sys.probes.dof_sets[i])
      if (!sys.has_edge(d.value) && !(d.value.rfind("atom:", 0) == 0 && [&] {
            for (const auto& a : sys.atoms)
              if ("atom:" + a.id == d.value) return true;
            return false;
          }())) {
        bad(sub("probes.dof_sets", i), "unknown d.o.f. '" + d.value + "'");
      }
  for (std::size_t i = 0; i < sys.operator_probes.size(); ++i)
    for (const auto& combo : sys.operator_probes[i])
      for (const auto& [fid, _] : combo.faces)
        if (!sys.has_face(fid)) bad(sub("probes.operator_sets", i), "unknown face '" + fid + "'");
  return sys;
}

// ---------------------------------------------------------------------------

Json state_to_json(const StateDocument& doc) {
  Json terms = Json::array();
  for (const auto& t : doc.state.terms) {
    Json s = Json::array();
    for (Eigen::Index i = 0; i < t.kernel.s.size(); ++i) s.push_back(complex_json(t.kernel.s(i)));
    terms.push_back(Json{{"weight", t.weight},
                         {"P", cmatrix_json(t.kernel.P)},
                         {"R", cmatrix_json(t.kernel.R)},
                         {"s", s},
                         {"logw", t.kernel.logw}});
  }
  return Json{{"label", doc.label},
              {"dim", doc.state.dim},
              {"provenance", std::string(to_string(doc.state.provenance))},
              {"terms", terms}};
}

StateDocument state_from_json(const Json& doc) {
  StateDocument out;
  out.label = str(req(doc, "label", ""), "label");
  if (auto it = doc.find("provenance"); it != doc.end()) out.state.provenance = provenance_from(str(*it, "provenance"), "provenance");
  const Json& terms = arr(req(doc, "terms", ""), "terms");
  if (terms.empty()) bad("terms", "a state needs at least one term");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string path = sub("terms", i);
    const Json& t = terms[i];
    const Json& s = arr(req(t, "s", path), sub(path, "s"));
    const std::size_t n = s.size();
    if (n == 0) bad(sub(path, "s"), "empty");
    if (i == 0) out.state.dim = n;
    if (n != out.state.dim) bad(sub(path, "s"), "dimension differs from the first term");
    GaussianTerm term;
    term.weight = num(req(t, "weight", path), sub(path, "weight"));
    if (!(term.weight > 0)) bad(sub(path, "weight"), "must be positive");
    term.kernel.s.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) term.kernel.s(static_cast<Eigen::Index>(k)) = cplx(s[k], sub(sub(path, "s"), k));
    term.kernel.P = cmatrix(req(t, "P", path), n, sub(path, "P"));
    term.kernel.R = cmatrix(req(t, "R", path), n, sub(path, "R"));
    term.kernel.logw = num(req(t, "logw", path), sub(path, "logw"));
    const double scale = 1.0 + term.kernel.P.cwiseAbs().maxCoeff() + term.kernel.R.cwiseAbs().maxCoeff();
    if ((term.kernel.P - term.kernel.P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      bad(sub(path, "P"), "not symmetric");
    }
    if ((term.kernel.R - term.kernel.R.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      bad(sub(path, "R"), "not Hermitian");
    }
    try {
      (void)kernel_trace(term.kernel);
    } catch (const Error& e) {
      bad(path, std::string("kernel is not trace class (") + e.what() + ")");
    }
    out.state.terms.push_back(std::move(term));
  }
  if (auto it = doc.find("dim"); it != doc.end()) {
    if (!it->is_number_unsigned() || it->get<std::size_t>() != out.state.dim) bad("dim", "disagrees with the terms");
  }
  return out;
}

// ---------------------------------------------------------------------------

Json ap_to_json(const APVector& v) {
  Json terms = Json::array();
  for (const auto& [b, alpha] : v.amplitudes()) {
    terms.push_back(Json{{"frequency", rat_row(b)}, {"amplitude", Json::array({rat_json(alpha.re), rat_json(alpha.im)})}});
  }
  return Json{{"frame", frame_json(v.frame())}, {"terms", terms}};
}

APVector ap_from_json(const Json& doc) {
  APVector v(frame_from(req(doc, "frame", ""), "frame"));
  const Json& terms = arr(req(doc, "terms", ""), "terms");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string path = sub("terms", i);
    Frequency b = rat_vector(req(terms[i], "frequency", path), sub(path, "frequency"));
    if (b.size() != v.frame().size()) bad(sub(path, "frequency"), "length differs from the frame");
    const Json& a = req(terms[i], "amplitude", path);
    ComplexRational alpha;
    if (a.is_array()) {
      if (a.size() != 2) bad(sub(path, "amplitude"), "expected [re, im]");
      alpha = {rat(a[0], sub(path, "amplitude[0]")), rat(a[1], sub(path, "amplitude[1]"))};
    } else {
      alpha = ComplexRational(rat(a, sub(path, "amplitude")));
    }
    v.add(b, alpha);
  }
  return v;
}

Json projection_to_json(const ProjectionMatrix& b) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < b.entries.rows(); ++i) rows.push_back(rat_row(b.entries.row(i)));
  return Json{{"source", frame_json(b.source)}, {"target", frame_json(b.target)}, {"matrix", rows}};
}

ProjectionMatrix projection_from_json(const Json& doc) {
  const ReducedFrame source = frame_from(req(doc, "source", ""), "source");
  const ReducedFrame target = frame_from(req(doc, "target", ""), "target");
  const auto rows = rat_rows(req(doc, "matrix", ""), "matrix");
  if (rows.size() != target.size()) bad("matrix", "needs one row per target d.o.f.");
  CoefficientMap combos;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != source.size()) bad(sub("matrix", i), "needs one entry per source d.o.f.");
    combos[target[i]] = rows[i];
  }
  try {
    return build_projection(target, source, combos);
  } catch (const Error& e) {
    bad("matrix", e.what());
  }
}

Json assumption_report_to_json(const AssumptionReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(Json{{"assumption", c.assumption},
                          {"anchor", c.anchor},
                          {"subject", c.subject},
                          {"pass", c.pass},
                          {"detail", c.detail}});
  }
  return Json{{"pass", report.passed()},
              {"instances", report.checks.size()},
              {"failures", report.failures()},
              {"checks", checks}};
}

}  // namespace pqk::io
