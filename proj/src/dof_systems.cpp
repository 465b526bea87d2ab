#include "pqk/dof_systems.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pqk/error.hpp"

namespace pqk {

void EvaluationBasis::add(const DofId& id, std::vector<Rational> profile) {
  if (profile.size() != configuration_count_) {
    throw Error(ErrorCode::DimensionMismatch, "profile of '" + id.value + "' has length " +
                                                  std::to_string(profile.size()) + ", expected " +
                                                  std::to_string(configuration_count_));
  }
  if (!profiles_.emplace(id, std::move(profile)).second) {
    throw Error(ErrorCode::MalformedInput, "d.o.f. '" + id.value + "' registered twice");
  }
}

const std::vector<Rational>& EvaluationBasis::profile(const DofId& id) const {
  auto it = profiles_.find(id);
  if (it == profiles_.end()) throw Error(ErrorCode::MalformedInput, "unknown d.o.f. '" + id.value + "'");
  return it->second;
}

RationalMatrix EvaluationBasis::frame_profiles(const ReducedFrame& frame) const {
  RationalMatrix m(frame.size(), configuration_count_);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const auto& p = profile(frame[i]);
    for (std::size_t t = 0; t < configuration_count_; ++t) m(i, t) = p[t];
  }
  return m;
}

Rational EvaluationBasis::evaluate(const DofId& id, const std::vector<Rational>& configuration) const {
  const auto& p = profile(id);
  if (configuration.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "configuration length");
  Rational v = 0;
  for (std::size_t t = 0; t < p.size(); ++t) v += p[t] * configuration[t];
  return v;
}

const Rational& MomentumOperator::on(const DofId& dof) const {
  auto it = action.find(dof);
  if (it == action.end()) {
    throw Error(ErrorCode::MissingAction, "operator '" + id + "' has no action on '" + dof.value + "'");
  }
  return it->second;
}

MomentumOperator combine_operators(std::string id, const std::vector<Rational>& coeffs,
                                   const std::vector<MomentumOperator>& ops) {
  if (coeffs.size() != ops.size()) throw Error(ErrorCode::DimensionMismatch, "operator combination lengths");
  MomentumOperator out{std::move(id), {}};
  if (ops.empty()) return out;
  for (const auto& [dof, _] : ops.front().action) {
    bool everywhere = true;
    Rational v = 0;
    for (std::size_t k = 0; k < ops.size() && everywhere; ++k) {
      auto it = ops[k].action.find(dof);
      if (it == ops[k].action.end()) {
        everywhere = false;
      } else {
        v += coeffs[k] * it->second;
      }
    }
    if (everywhere) out.action.emplace(dof, v);
  }
  return out;
}

GMatrix g_matrix(const SystemLabel& label) {
  const std::size_t n = label.frame.size();
  if (label.ops.size() != n) {
    throw Error(ErrorCode::DegenerateG, "label '" + label.id + "' has " + std::to_string(label.ops.size()) +
                                            " operators for " + std::to_string(n) + " d.o.f.");
  }
  RationalMatrix g(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) g(j, i) = label.ops[j].on(label.frame[i]);
  if (n == 0 || determinant(g) == 0) {
    throw Error(ErrorCode::DegenerateG, "G of label '" + label.id + "' is singular");
  }
  return GMatrix{std::move(g)};
}

std::vector<Rational> operator_point(const MomentumOperator& op, const ReducedFrame& frame) {
  std::vector<Rational> point;
  point.reserve(frame.size());
  for (const auto& dof : frame.dofs()) point.push_back(op.on(dof));
  return point;
}

namespace {

std::vector<Rational> combine_profiles(const EvaluationBasis& basis, const ReducedFrame& frame,
                                       const std::vector<Rational>& coeffs) {
  std::vector<Rational> out(basis.configuration_count(), Rational(0));
  for (std::size_t j = 0; j < frame.size(); ++j) {
    if (coeffs[j] == 0) continue;
    const auto& p = basis.profile(frame[j]);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += coeffs[j] * p[t];
  }
  return out;
}

std::string join_ids(const std::vector<DofId>& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + ids[i].value;
  return out + "}";
}

// Rows: operators; columns: every d.o.f. of the evaluation universe.
RationalMatrix action_matrix(const std::vector<MomentumOperator>& ops, const EvaluationBasis& basis) {
  RationalMatrix m(ops.size(), basis.profiles().size());
  for (std::size_t k = 0; k < ops.size(); ++k) {
    std::size_t c = 0;
    for (const auto& [dof, _] : basis.profiles()) m(k, c++) = ops[k].on(dof);
  }
  return m;
}

std::vector<Rational> action_vector(const MomentumOperator& op, const EvaluationBasis& basis) {
  std::vector<Rational> v;
  v.reserve(basis.profiles().size());
  for (const auto& [dof, _] : basis.profiles()) v.push_back(op.on(dof));
  return v;
}

bool in_row_space(const RationalMatrix& rows, const std::vector<Rational>& v) {
  return solve(rows.transpose(), v).has_value();
}

}  // namespace

OrderCheck relation_geq(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                        const EvaluationBasis& basis) {
  OrderCheck check;
  std::ostringstream diag;
  try {
    check.combos_ok = true;
    for (const auto& dof : lower.frame.dofs()) {
      auto it = witness.combos.find(dof);
      if (it == witness.combos.end() || it->second.size() != upper.frame.size()) {
        diag << "missing or malformed combination for d.o.f. '" << dof.value << "'; ";
        check.combos_ok = false;
        continue;
      }
      if (combine_profiles(basis, upper.frame, it->second) != basis.profile(dof)) {
        diag << "d.o.f. '" << dof.value << "' of " << lower.id << " differs from its witnessed combination over "
             << upper.id << "; ";
        check.combos_ok = false;
      }
    }
    if (check.combos_ok) {
      try {
        (void)witnessed_projection(upper, lower, witness);
      } catch (const Error& e) {
        diag << e.what() << "; ";
        check.combos_ok = false;
      }
    }

    check.ops_ok = witness.op_membership.size() == lower.ops.size();
    if (!check.ops_ok) diag << "operator witness has " << witness.op_membership.size() << " rows; ";
    for (std::size_t i = 0; check.ops_ok && i < lower.ops.size(); ++i) {
      const auto& coeffs = witness.op_membership[i];
      if (coeffs.size() != upper.ops.size()) {
        diag << "operator witness row " << i << " has wrong length; ";
        check.ops_ok = false;
        break;
      }
      for (const auto& [dof, _] : basis.profiles()) {
        Rational v = 0;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
          if (coeffs[k] != 0) v += coeffs[k] * upper.ops[k].on(dof);
        if (v != lower.ops[i].on(dof)) {
          diag << "operator '" << lower.ops[i].id << "' of " << lower.id
               << " is not the witnessed combination of operators of " << upper.id << " (differs on '" << dof.value
               << "'); ";
          check.ops_ok = false;
          break;
        }
      }
    }
  } catch (const Error& e) {
    diag << e.what();
    check.ops_ok = false;
  }
  check.diagnostic = diag.str();
  return check;
}

ProjectionMatrix witnessed_projection(const SystemLabel& upper, const SystemLabel& lower,
                                      const OrderWitness& witness) {
  return build_projection(lower.frame, upper.frame, witness.combos);
}

RationalMatrix injection_omega(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                               const EvaluationBasis& basis) {
  if (auto check = relation_geq(upper, lower, witness, basis); !check) {
    throw Error(ErrorCode::WitnessInvalid, upper.id + " >= " + lower.id + " not witnessed: " + check.diagnostic);
  }
  const GMatrix g = g_matrix(lower);
  const std::size_t n = lower.frame.size();
  const std::size_t n_up = upper.frame.size();
  RationalMatrix g_up(n, n_up);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n_up; ++l) g_up(j, l) = lower.ops[j].on(upper.frame[l]);
  const auto g_t_inv = inverse(g.entries.transpose());
  RationalMatrix w = g_up.transpose() * (*g_t_inv);
  if (!(witnessed_projection(upper, lower, witness).entries * w).is_identity()) {
    throw Error(ErrorCode::WitnessInvalid, "B·W != I for " + upper.id + " >= " + lower.id +
                                               "; operator actions are not linear through the frame");
  }
  return w;
}

Reduction reduction(const SystemLabel& upper, const SystemLabel& lower, const OrderWitness& witness,
                    const EvaluationBasis& basis) {
  RationalMatrix w = injection_omega(upper, lower, witness, basis);
  ProjectionMatrix b = witnessed_projection(upper, lower, witness);
  KernelDecomposition split = kernel_decomposition(b, w);
  return Reduction{std::move(b), std::move(split)};
}

std::optional<OrderWitness> derive_order_witness(const SystemLabel& upper, const SystemLabel& lower,
                                                 const EvaluationBasis& basis) {
  OrderWitness witness;
  const RationalMatrix up_t = basis.frame_profiles(upper.frame).transpose();
  for (const auto& dof : lower.frame.dofs()) {
    auto c = solve(up_t, basis.profile(dof));
    if (!c) return std::nullopt;
    witness.combos.emplace(dof, std::move(*c));
  }
  try {
    const RationalMatrix ops_t = action_matrix(upper.ops, basis).transpose();
    for (const auto& op : lower.ops) {
      auto c = solve(ops_t, action_vector(op, basis));
      if (!c) return std::nullopt;
      witness.op_membership.push_back(std::move(*c));
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!relation_geq(upper, lower, witness, basis)) return std::nullopt;
  return witness;
}

OrderWitness compose_witnesses(const SystemLabel& upper, const SystemLabel& middle, const SystemLabel& lower,
                               const OrderWitness& upper_middle, const OrderWitness& middle_lower) {
  OrderWitness out;
  for (const auto& dof : lower.frame.dofs()) {
    const auto& c = middle_lower.combos.at(dof);
    std::vector<Rational> total(upper.frame.size(), Rational(0));
    for (std::size_t j = 0; j < middle.frame.size(); ++j) {
      if (c[j] == 0) continue;
      const auto& d = upper_middle.combos.at(middle.frame[j]);
      for (std::size_t l = 0; l < total.size(); ++l) total[l] += c[j] * d[l];
    }
    out.combos.emplace(dof, std::move(total));
  }
  for (const auto& row : middle_lower.op_membership) {
    std::vector<Rational> total(upper.ops.size(), Rational(0));
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0) continue;
      const auto& d = upper_middle.op_membership.at(j);
      for (std::size_t l = 0; l < total.size(); ++l) total[l] += row[j] * d[l];
    }
    out.op_membership.push_back(std::move(total));
  }
  return out;
}

OrderWitness identity_witness(const SystemLabel& label) {
  OrderWitness w;
  const std::size_t n = label.frame.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> e(n, Rational(0));
    e[i] = 1;
    w.combos.emplace(label.frame[i], e);
  }
  for (std::size_t i = 0; i < label.ops.size(); ++i) {
    std::vector<Rational> e(label.ops.size(), Rational(0));
    e[i] = 1;
    w.op_membership.push_back(std::move(e));
  }
  return w;
}

std::vector<DofId> select_independent_dofs(const std::vector<MomentumOperator>& ops,
                                           const std::vector<DofId>& pool) {
  const std::size_t m = ops.size();
  std::vector<DofId> chosen;
  if (m == 0) return chosen;
  // Each accepted d.o.f. contributes the constraint Σ_j a_j φ̂_j κ = 0; the
  // joint solution space shrinks exactly when the constraint row is new.
  RationalMatrix constraints(0, m);
  std::size_t rank = 0;
  for (const auto& dof : pool) {
    RationalMatrix row(1, m);
    for (std::size_t j = 0; j < m; ++j) row(0, j) = ops[j].on(dof);
    RationalMatrix candidate = constraints.vstack(row);
    const std::size_t r = exact_rank(candidate);
    if (r > rank) {
      constraints = std::move(candidate);
      rank = r;
      chosen.push_back(dof);
      if (rank == m) return chosen;
    }
  }
  throw Error(ErrorCode::NotResolvable, "operators remain dependent on the pool (rank " + std::to_string(rank) +
                                            " of " + std::to_string(m) + ")");
}

bool AssumptionReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
}

std::size_t AssumptionReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return !c.pass; }));
}

namespace {

constexpr const char* kAnchorA1a = "Assumption 1(a) (each probed d.o.f. is a combination of some label frame)";
constexpr const char* kAnchorA1b = "Assumption 1(b) (each probed operator lies in some label)";
constexpr const char* kAnchorA2 = "Assumption 2 (image of K~ is R^N)";
constexpr const char* kAnchorA3a = "Assumption 3(a) (operators act through the frame coordinates)";
constexpr const char* kAnchorA3b = "Assumption 3(b) (phi^ kappa is constant)";
constexpr const char* kAnchorA4 = "Assumption 4 (nondegenerate G)";
constexpr const char* kAnchorA5 = "Assumption 5 (equal Q_K implies order)";
constexpr const char* kAnchorA6a = "Assumption 6(a) (each d.o.f. of K is a linear combination of K')";
constexpr const char* kAnchorA6b = "Assumption 6(b) (F^ contained in F^')";
constexpr const char* kAnchorDirected = "directed set (common upper bound exists)";

class Auditor {
 public:
  Auditor(const std::vector<SystemLabel>& family, const std::vector<OrderRelation>& order,
          const AssumptionProbes& probes, const EvaluationBasis& basis)
      : family_(family), order_(order), probes_(probes), basis_(basis) {
    for (std::size_t i = 0; i < family_.size(); ++i) index_.emplace(family_[i].id, i);
  }

  AssumptionReport run() {
    check_order();
    check_dof_probes();
    check_operator_probes();
    check_surjectivity();
    check_derivations();
    check_nondegeneracy();
    check_equal_spaces();
    check_directedness();
    return std::move(report_);
  }

 private:
  void add(const char* assumption, const char* anchor, std::string subject, bool pass, std::string detail) {
    report_.checks.push_back(AssumptionCheck{assumption, anchor, std::move(subject), pass, std::move(detail)});
  }

  const SystemLabel* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &family_[it->second];
  }

  bool valid_relation(const std::string& upper, const std::string& lower) const {
    return upper == lower || valid_.count({upper, lower}) != 0;
  }

  void check_order() {
    for (const auto& rel : order_) {
      const std::string subject = rel.upper + " >= " + rel.lower;
      const SystemLabel* up = find(rel.upper);
      const SystemLabel* lo = find(rel.lower);
      if (!up || !lo) {
        add("A6a", kAnchorA6a, subject, false, "unknown label in order relation");
        continue;
      }
      const OrderCheck c = relation_geq(*up, *lo, rel.witness, basis_);
      add("A6a", kAnchorA6a, subject, c.combos_ok, c.combos_ok ? "witness verified" : c.diagnostic);
      add("A6b", kAnchorA6b, subject, c.ops_ok, c.ops_ok ? "witness verified" : c.diagnostic);
      if (c.holds()) {
        valid_.insert({rel.upper, rel.lower});
        witnesses_.emplace(std::make_pair(rel.upper, rel.lower), &rel.witness);
      }
    }
  }

  void check_dof_probes() {
    for (const auto& dofs : probes_.dof_sets) {
      std::string found;
      try {
        for (const auto& label : family_) {
          const RationalMatrix frame = basis_.frame_profiles(label.frame);
          if (std::all_of(dofs.begin(), dofs.end(),
                          [&](const DofId& d) { return in_row_space(frame, basis_.profile(d)); })) {
            found = label.id;
            break;
          }
        }
      } catch (const Error& e) {
        add("A1a", kAnchorA1a, join_ids(dofs), false, e.what());
        continue;
      }
      add("A1a", kAnchorA1a, join_ids(dofs), !found.empty(),
          found.empty() ? "no label frame spans the probe" : "spanned by " + found);
    }
  }

  void check_operator_probes() {
    for (const auto& ops : probes_.operator_sets) {
      std::string subject = "{";
      for (std::size_t i = 0; i < ops.size(); ++i) subject += (i ? "," : "") + ops[i].id;
      subject += "}";
      std::string found;
      for (const auto& label : family_) {
        try {
          const RationalMatrix span = action_matrix(label.ops, basis_);
          if (std::all_of(ops.begin(), ops.end(),
                          [&](const MomentumOperator& op) { return in_row_space(span, action_vector(op, basis_)); })) {
            found = label.id;
            break;
          }
        } catch (const Error&) {
        }
      }
      add("A1b", kAnchorA1b, subject, !found.empty(),
          found.empty() ? "no label contains the probe operators" : "contained in " + found);
    }
  }

  // Exact check of K~(q_k) = t_k with the targets spanning R^N.
  std::string verify_surjectivity(const SystemLabel& label, const std::vector<std::vector<Rational>>& configurations,
                                  const std::vector<std::vector<Rational>>& targets) const {
    if (configurations.size() != targets.size()) return "configuration/target counts differ";
    const std::size_t n = label.frame.size();
    RationalMatrix t(targets.size(), n);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      if (targets[k].size() != n) return "target " + std::to_string(k) + " has wrong length";
      if (configurations[k].size() != basis_.configuration_count()) return "configuration has wrong length";
      for (std::size_t i = 0; i < n; ++i) {
        if (basis_.evaluate(label.frame[i], configurations[k]) != targets[k][i]) {
          return "configuration " + std::to_string(k) + " misses its target on '" + label.frame[i].value + "'";
        }
        t(k, i) = targets[k][i];
      }
    }
    if (exact_rank(t) != n) return "targets do not span R^" + std::to_string(n);
    return {};
  }

  void check_surjectivity() {
    std::map<std::string, const SurjectivityWitness*> explicit_witness;
    for (const auto& w : probes_.surjectivity) explicit_witness.emplace(w.label, &w);

    std::map<std::string, std::string> verdict;  // empty string = verified
    std::map<std::string, std::string> detail;
    std::map<std::string, std::vector<std::vector<Rational>>> configs;
    for (const auto& label : family_) {
      auto it = explicit_witness.find(label.id);
      if (it == explicit_witness.end()) continue;
      try {
        verdict[label.id] = verify_surjectivity(label, it->second->configurations, it->second->targets);
      } catch (const Error& e) {
        verdict[label.id] = e.what();
      }
      detail[label.id] = "explicit witness";
      if (verdict[label.id].empty()) configs[label.id] = it->second->configurations;
    }
    // Labels below a verified label inherit its configurations: K̃ = B K̃'.
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& label : family_) {
        if (verdict.count(label.id) && verdict[label.id].empty()) continue;
        for (const auto& [key, witness] : witnesses_) {
          if (key.second != label.id || !configs.count(key.first)) continue;
          const SystemLabel& upper = *find(key.first);
          const auto& cfg = configs[key.first];
          try {
            const ProjectionMatrix b = witnessed_projection(upper, label, *witness);
            std::vector<std::vector<Rational>> targets;
            for (const auto& q : cfg) {
              std::vector<Rational> up_target;
              for (const auto& dof : upper.frame.dofs()) up_target.push_back(basis_.evaluate(dof, q));
              targets.push_back(b.entries * up_target);
            }
            if (verify_surjectivity(label, cfg, targets).empty()) {
              verdict[label.id] = "";
              detail[label.id] = "derived through " + upper.id;
              configs[label.id] = cfg;
              progress = true;
              break;
            }
          } catch (const Error&) {
          }
        }
      }
    }
    for (const auto& label : family_) {
      auto it = verdict.find(label.id);
      if (it == verdict.end()) {
        add("A2", kAnchorA2, label.id, false, "no surjectivity witness");
      } else {
        add("A2", kAnchorA2, label.id, it->second.empty(), it->second.empty() ? detail[label.id] : it->second);
      }
    }
  }

  void check_derivations() {
    const std::size_t dofs = basis_.profiles().size();
    RationalMatrix profiles(dofs, basis_.configuration_count());
    std::size_t r = 0;
    for (const auto& [_, p] : basis_.profiles()) {
      for (std::size_t t = 0; t < p.size(); ++t) profiles(r, t) = p[t];
      ++r;
    }
    for (const auto& label : family_) {
      std::string failure;
      for (const auto& op : label.ops) {
        try {
          // φ̂ must be a linear functional ℓ on configurations: φ̂κ = ℓ·profile(κ).
          if (!solve(profiles, action_vector(op, basis_))) {
            failure = "operator '" + op.id + "' is not linear through the d.o.f. profiles";
            break;
          }
        } catch (const Error& e) {
          failure = e.what();
          break;
        }
      }
      add("A3a", kAnchorA3a, label.id, failure.empty(), failure.empty() ? "all operators linear" : failure);
      add("A3b", kAnchorA3b, label.id, true, "actions are stored as real constants");
    }
  }

  void check_nondegeneracy() {
    for (const auto& label : family_) {
      try {
        const GMatrix g = g_matrix(label);
        add("A4", kAnchorA4, label.id, true, "det G = " + format_rational(determinant(g.entries)));
      } catch (const Error& e) {
        add("A4", kAnchorA4, label.id, false, e.what());
      }
    }
  }

  void check_equal_spaces() {
    for (const auto& a : family_) {
      for (const auto& b : family_) {
        if (a.id == b.id) continue;
        try {
          const RationalMatrix fa = basis_.frame_profiles(a.frame);
          const RationalMatrix fb = basis_.frame_profiles(b.frame);
          const std::size_t ra = exact_rank(fa);
          if (ra != exact_rank(fb) || exact_rank(fa.vstack(fb)) != ra) continue;
          const RationalMatrix oa = action_matrix(a.ops, basis_);
          const RationalMatrix ob = action_matrix(b.ops, basis_);
          const std::size_t sa = exact_rank(oa);
          if (sa != exact_rank(ob) || exact_rank(oa.vstack(ob)) != sa) continue;
        } catch (const Error&) {
          continue;
        }
        const bool ok = valid_relation(a.id, b.id);
        add("A5", kAnchorA5, a.id + " >= " + b.id, ok,
            ok ? "witnessed" : "same F^ and Q_K but no valid order witness");
      }
    }
  }

  void check_directedness() {
    for (const auto& [x, y] : probes_.joins) {
      std::string found;
      if (find(x) && find(y)) {
        for (const auto& label : family_) {
          if (valid_relation(label.id, x) && valid_relation(label.id, y)) {
            found = label.id;
            break;
          }
        }
      }
      add("directedness", kAnchorDirected, x + " v " + y, !found.empty(),
          found.empty() ? "no witnessed common upper bound" : "bounded by " + found);
    }
  }

  const std::vector<SystemLabel>& family_;
  const std::vector<OrderRelation>& order_;
  const AssumptionProbes& probes_;
  const EvaluationBasis& basis_;
  std::map<std::string, std::size_t> index_;
  std::set<std::pair<std::string, std::string>> valid_;
  std::map<std::pair<std::string, std::string>, const OrderWitness*> witnesses_;
  AssumptionReport report_;
};

}  // namespace

AssumptionReport check_assumptions(const std::vector<SystemLabel>& family, const std::vector<OrderRelation>& order,
                                   const AssumptionProbes& probes, const EvaluationBasis& basis) {
  return Auditor(family, order, probes, basis).run();
}

}  // namespace pqk
