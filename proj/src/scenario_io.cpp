#include "mgare/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mgare {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw SchemaError("scenario: key '" + key + "' is not a matrix (array of rows)");
  const std::size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw SchemaError("scenario: ragged or malformed row " + std::to_string(i) +
                        " in key '" + key + "'");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number())
        throw SchemaError("scenario: non-numeric entry in key '" + key + "'");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw SchemaError("scenario: key '" + key + "' is not an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw SchemaError("scenario: non-numeric entry in key '" + key + "'");
    v(i) = j[i].get<double>();
  }
  return v;
}

json channel_to_json(const ChannelModel& m) {
  json out;
  if (const auto* fs = std::get_if<FiniteSupport>(&m.law)) {
    out["type"] = "finite";
    json atoms = json::array();
    for (const Matrix& a : fs->atoms) atoms.push_back(matrix_to_json(a));
    out["atoms"] = std::move(atoms);
    out["probs"] = fs->probs;
  } else if (const auto* g = std::get_if<GaussianIid>(&m.law)) {
    out["type"] = "gaussian";
    out["mean"] = matrix_to_json(g->mean);
    out["stddev"] = matrix_to_json(g->stddev);
  } else {
    const auto& b = std::get<BernoulliGated>(m.law);
    out["type"] = "bernoulli_gated";
    out["p"] = b.p;
    out["inner"] = channel_to_json(*b.inner);
  }
  return out;
}

ChannelModel channel_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type"))
    throw SchemaError("scenario: channel model at " + where + " needs a 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "finite") {
    if (!j.contains("atoms") || !j.contains("probs"))
      throw SchemaError("scenario: finite channel at " + where + " needs 'atoms' and 'probs'");
    std::vector<Matrix> atoms;
    for (std::size_t i = 0; i < j["atoms"].size(); ++i)
      atoms.push_back(matrix_from_json(j["atoms"][i], where + ".atoms"));
    return finite_channel(std::move(atoms), j["probs"].get<std::vector<double>>());
  }
  if (type == "gaussian") {
    Matrix mean = matrix_from_json(j.at("mean"), where + ".mean");
    if (j.contains("stddev") && j["stddev"].is_number())
      return gaussian_channel(std::move(mean), j["stddev"].get<double>());
    return gaussian_channel(std::move(mean), matrix_from_json(j.at("stddev"), where + ".stddev"));
  }
  if (type == "bernoulli_gated") {
    return gated_channel(j.at("p").get<double>(), channel_from_json(j.at("inner"), where));
  }
  throw SchemaError("scenario: unknown channel type '" + type + "' at " + where);
}

const char* coupling_name(GateCoupling c) {
  switch (c) {
    case GateCoupling::Independent: return "independent";
    case GateCoupling::PerTransmitter: return "per_transmitter";
    case GateCoupling::Shared: return "shared";
  }
  return "independent";
}

GateCoupling coupling_from(const std::string& s, const std::string& key) {
  if (s == "independent") return GateCoupling::Independent;
  if (s == "per_transmitter") return GateCoupling::PerTransmitter;
  if (s == "shared") return GateCoupling::Shared;
  throw SchemaError("scenario: unknown gate coupling '" + s + "' in key '" + key + "'");
}

json grid_to_json(const ChannelGrid& g) {
  json out;
  out["gate_coupling"] = coupling_name(g.coupling);
  json rows = json::array();
  for (const auto& row : g.models) {
    json r = json::array();
    for (const auto& m : row) r.push_back(channel_to_json(m));
    rows.push_back(std::move(r));
  }
  out["grid"] = std::move(rows);
  return out;
}

ChannelGrid grid_from_json(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains("grid"))
    throw SchemaError("scenario: key '" + key + "' needs a 'grid'");
  ChannelGrid g;
  if (j.contains("gate_coupling"))
    g.coupling = coupling_from(j["gate_coupling"].get<std::string>(), key);
  for (std::size_t r = 0; r < j["grid"].size(); ++r) {
    std::vector<ChannelModel> row;
    for (std::size_t c = 0; c < j["grid"][r].size(); ++c)
      row.push_back(channel_from_json(j["grid"][r][c],
                                      key + "[" + std::to_string(r) + "][" +
                                          std::to_string(c) + "]"));
    g.models.push_back(std::move(row));
  }
  return g;
}

template <typename T>
T require_field(const json& j, const std::string& key) {
  if (!j.contains(key)) throw SchemaError("scenario: missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError("scenario: key '" + key + "' has the wrong type");
  }
}

}  // namespace

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["dims"] = {{"state", sc.dims.state},
               {"rx_antennas", sc.dims.rx_antennas},
               {"tx_controller", sc.dims.tx_controller},
               {"tx_attacker", sc.dims.tx_attacker},
               {"num_controllers", sc.dims.num_controllers},
               {"num_attackers", sc.dims.num_attackers}};
  j["A"] = matrix_to_json(sc.A);
  json gains = json::array();
  for (const Matrix& b : sc.B) gains.push_back(matrix_to_json(b));
  j["B"] = std::move(gains);
  j["Q"] = matrix_to_json(sc.Q);
  j["Rc"] = matrix_to_json(sc.Rc);
  j["Ra"] = matrix_to_json(sc.Ra);
  j["W"] = matrix_to_json(sc.W);
  j["V"] = matrix_to_json(sc.V);
  json x0 = json::array();
  for (Eigen::Index i = 0; i < sc.x0.size(); ++i) x0.push_back(sc.x0(i));
  j["x0"] = std::move(x0);
  j["controller_channels"] = grid_to_json(sc.controller_channels);
  j["attacker_channels"] = grid_to_json(sc.attacker_channels);
  j["seed"] = sc.seed;
  j["samples"] = sc.sample_count;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
  }
  Scenario sc;
  const json& d = j.contains("dims") ? j["dims"] : json::object();
  sc.dims.state = require_field<Eigen::Index>(d, "state");
  sc.dims.rx_antennas = require_field<Eigen::Index>(d, "rx_antennas");
  sc.dims.tx_controller = require_field<Eigen::Index>(d, "tx_controller");
  sc.dims.tx_attacker = require_field<Eigen::Index>(d, "tx_attacker");
  sc.dims.num_controllers = require_field<Eigen::Index>(d, "num_controllers");
  sc.dims.num_attackers = require_field<Eigen::Index>(d, "num_attackers");
  if (!j.contains("A")) throw SchemaError("scenario: missing key 'A'");
  sc.A = matrix_from_json(j["A"], "A");
  if (!j.contains("B") || !j["B"].is_array())
    throw SchemaError("scenario: missing key 'B' (array of input gains)");
  for (std::size_t i = 0; i < j["B"].size(); ++i)
    sc.B.push_back(matrix_from_json(j["B"][i], "B[" + std::to_string(i) + "]"));
  for (const char* key : {"Q", "Rc", "Ra", "W", "V"})
    if (!j.contains(key)) throw SchemaError(std::string("scenario: missing key '") + key + "'");
  sc.Q = matrix_from_json(j["Q"], "Q");
  sc.Rc = matrix_from_json(j["Rc"], "Rc");
  sc.Ra = matrix_from_json(j["Ra"], "Ra");
  sc.W = matrix_from_json(j["W"], "W");
  sc.V = matrix_from_json(j["V"], "V");
  if (!j.contains("x0")) throw SchemaError("scenario: missing key 'x0'");
  sc.x0 = vector_from_json(j["x0"], "x0");
  if (!j.contains("controller_channels") || !j.contains("attacker_channels"))
    throw SchemaError("scenario: missing channel grids");
  sc.controller_channels = grid_from_json(j["controller_channels"], "controller_channels");
  sc.attacker_channels = grid_from_json(j["attacker_channels"], "attacker_channels");
  sc.seed = require_field<std::uint64_t>(j, "seed");
  sc.sample_count = require_field<int>(j, "samples");
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("scenario: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& sc, const std::string& path) {
  write_file(path, scenario_to_json(sc));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string existence_report_json(const Scenario& sc, const MgareSolution& sol) {
  json j;
  j["verdict"] = to_string(sol.verdict);
  j["iterations"] = sol.iterations;
  j["residual"] = sol.residual;
  if (sol.failure_step >= 0) j["failure_step"] = sol.failure_step;
  j["trajectory_norms"] = sol.trajectory_norms;
  json flags = json::array();
  for (char c : sol.membership_ok) flags.push_back(c != 0);
  j["membership_ok"] = std::move(flags);
  if (sol.exists()) {
    j["P_star"] = matrix_to_json(sol.P_star);
    j["game_value"] = game_value(sc, sol);
  }
  return j.dump(2);
}

std::string certificate_json(const Certificate& cert) {
  json j;
  j["verdict"] = to_string(cert.status);
  j["rho_kron"] = cert.rho_kron;
  j["xi"] = cert.xi;
  j["checks"] = {{"gT_condition", cert.contraction_ok},
                 {"mnmi", cert.descent_ok},
                 {"membership", cert.membership_ok}};
  j["lyapunov_residual"] = cert.lyapunov_residual;
  if (cert.T_star) j["T_star"] = matrix_to_json(*cert.T_star);
  if (cert.P_tilde) j["P_tilde"] = matrix_to_json(*cert.P_tilde);
  if (cert.Ra_bound.size() > 0) j["Ra_bound"] = matrix_to_json(cert.Ra_bound);
  if (cert.Ra_chosen.size() > 0) j["Ra_chosen"] = matrix_to_json(cert.Ra_chosen);
  return j.dump(2);
}

std::string cost_report_json(const CostReport& report, double analytic) {
  json j;
  j["empirical"] = report.empirical;
  j["std_error"] = report.std_error;
  j["horizon"] = report.horizon;
  j["runs"] = report.runs;
  j["overflow_runs"] = report.overflow_runs;
  if (std::isfinite(analytic)) j["analytic"] = analytic;
  return j.dump(2);
}

std::string trace_csv(const PolicyTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  const Eigen::Index s = trace.states.empty() ? 0 : trace.states[0].size();
  const Eigen::Index mc = trace.controls.empty() ? 0 : trace.controls[0].size();
  const Eigen::Index ma = trace.attacks.empty() ? 0 : trace.attacks[0].size();
  out << "run,k";
  for (Eigen::Index i = 0; i < s; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < mc; ++i) out << ",u_c" << i;
  for (Eigen::Index i = 0; i < ma; ++i) out << ",u_a" << i;
  out << ",stage_cost\n";
  for (std::size_t k = 0; k < trace.stage_costs.size(); ++k) {
    out << 0 << "," << k;
    for (Eigen::Index i = 0; i < s; ++i) out << "," << trace.states[k](i);
    for (Eigen::Index i = 0; i < mc; ++i) out << "," << trace.controls[k](i);
    for (Eigen::Index i = 0; i < ma; ++i) out << "," << trace.attacks[k](i);
    out << "," << trace.stage_costs[k] << "\n";
  }
  return out.str();
}

}  // namespace mgare
