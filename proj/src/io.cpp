#include "bnpmed/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bnpmed::io {

namespace {

std::string kind_str(ColKind k) {
  return k == ColKind::Binary ? "binary" : "continuous";
}

ColKind kind_from(const std::string& s) {
  if (s == "binary") return ColKind::Binary;
  if (s == "continuous") return ColKind::Continuous;
  throw std::invalid_argument("schema: unknown column kind '" + s + "'");
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

json mat_cols_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (int c = 0; c < m.cols(); ++c) a.push_back(vec_to_json(m.col(c)));
  return a;
}

Eigen::MatrixXd mat_cols_from_json(const json& j) {
  const int cols = static_cast<int>(j.size());
  if (cols == 0) return Eigen::MatrixXd(0, 0);
  const int rows = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) m.col(c) = vec_from_json(j[c]);
  return m;
}

void expect_keys(const json& j, const std::vector<std::string>& allowed,
                 const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

void write_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("draw log: truncated length field");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- schema -------------------------------------------------------------

json SchemaSpec::to_json() const {
  json j;
  j["outcome"] = {{"name", outcome}, {"kind", kind_str(outcome_kind)}};
  j["treatment"] = treatment;
  json med = json::array(), conf = json::array();
  for (const auto& [name, kind] : mediators)
    med.push_back({{"name", name}, {"kind", kind_str(kind)}});
  for (const auto& [name, kind] : confounders)
    conf.push_back({{"name", name}, {"kind", kind_str(kind)}});
  j["mediators"] = med;
  j["confounders"] = conf;
  return j;
}

SchemaSpec SchemaSpec::from_json(const json& j) {
  expect_keys(j, {"outcome", "treatment", "mediators", "confounders"}, "schema");
  SchemaSpec s;
  expect_keys(j.at("outcome"), {"name", "kind"}, "schema.outcome");
  s.outcome = j.at("outcome").at("name").get<std::string>();
  s.outcome_kind = kind_from(j.at("outcome").at("kind").get<std::string>());
  s.treatment = j.at("treatment").get<std::string>();
  s.mediators.clear();
  for (const auto& e : j.at("mediators")) {
    expect_keys(e, {"name", "kind"}, "schema.mediators[]");
    s.mediators.emplace_back(e.at("name").get<std::string>(),
                             kind_from(e.at("kind").get<std::string>()));
  }
  s.confounders.clear();
  if (j.contains("confounders"))
    for (const auto& e : j.at("confounders")) {
      expect_keys(e, {"name", "kind"}, "schema.confounders[]");
      s.confounders.emplace_back(e.at("name").get<std::string>(),
                                 kind_from(e.at("kind").get<std::string>()));
    }
  if (s.mediators.empty()) throw std::invalid_argument("schema: needs at least one mediator");
  return s;
}

SchemaSpec SchemaSpec::for_dataset(const Dataset& d) {
  SchemaSpec s;
  s.outcome = d.y_name;
  s.outcome_kind = d.y_kind;
  s.treatment = d.a_name;
  for (int q = 0; q < d.q(); ++q) s.mediators.emplace_back(d.m_names[q], d.m_kinds[q]);
  for (int r = 0; r < d.p1(); ++r)
    s.confounders.emplace_back(d.ld_names[r], ColKind::Binary);
  for (int r = 0; r < d.p2(); ++r)
    s.confounders.emplace_back(d.lc_names[r], ColKind::Continuous);
  return s;
}

// ---- csv ------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, const std::string& col, int row) {
  if (cell.empty())
    throw std::invalid_argument("csv: missing value in column '" + col +
                                "' at data row " + std::to_string(row));
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != cell.size())
    throw std::invalid_argument("csv: non-numeric value '" + cell +
                                "' in column '" + col + "' at data row " +
                                std::to_string(row));
  return v;
}

double check_binary_cell(double v, const std::string& col, int row) {
  if (v != 0.0 && v != 1.0)
    throw std::invalid_argument("csv: non-binary value '" + format_double(v) +
                                "' in binary column '" + col + "' at data row " +
                                std::to_string(row));
  return v;
}

}  // namespace

Dataset read_csv(const std::string& path, const SchemaSpec& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: missing header row");
  const std::vector<std::string> header = split_line(line);
  std::map<std::string, int> col_index;
  for (std::size_t c = 0; c < header.size(); ++c)
    col_index[header[c]] = static_cast<int>(c);
  auto find_col = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end())
      throw std::invalid_argument("csv: missing column '" + name + "'");
    return it->second;
  };

  const int iy = find_col(schema.outcome);
  const int ia = find_col(schema.treatment);
  std::vector<int> im, ild, ilc;
  std::vector<std::string> ld_names, lc_names;
  for (const auto& [name, kind] : schema.mediators) im.push_back(find_col(name));
  for (const auto& [name, kind] : schema.confounders) {
    if (kind == ColKind::Binary) {
      ild.push_back(find_col(name));
      ld_names.push_back(name);
    } else {
      ilc.push_back(find_col(name));
      lc_names.push_back(name);
    }
  }

  std::vector<std::vector<double>> rows;
  int rowno = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rowno;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("csv: wrong field count at data row " +
                                  std::to_string(rowno));
    std::vector<double> vals(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      vals[c] = parse_cell(cells[c], header[c], rowno);
    rows.push_back(std::move(vals));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw std::invalid_argument("csv: no data rows");

  Dataset d;
  d.y.resize(n);
  d.a.resize(n);
  d.m.resize(n, static_cast<int>(im.size()));
  d.l_disc.resize(n, static_cast<int>(ild.size()));
  d.l_cont.resize(n, static_cast<int>(ilc.size()));
  d.y_name = schema.outcome;
  d.y_kind = schema.outcome_kind;
  d.a_name = schema.treatment;
  for (const auto& [name, kind] : schema.mediators) {
    d.m_names.push_back(name);
    d.m_kinds.push_back(kind);
  }
  d.ld_names = ld_names;
  d.lc_names = lc_names;
  for (int i = 0; i < n; ++i) {
    d.y(i) = rows[i][iy];
    if (d.y_kind == ColKind::Binary) check_binary_cell(d.y(i), schema.outcome, i + 1);
    d.a(i) = check_binary_cell(rows[i][ia], schema.treatment, i + 1);
    for (std::size_t q = 0; q < im.size(); ++q) {
      d.m(i, static_cast<int>(q)) = rows[i][im[q]];
      if (d.m_kinds[q] == ColKind::Binary)
        check_binary_cell(d.m(i, q), d.m_names[q], i + 1);
    }
    for (std::size_t r = 0; r < ild.size(); ++r)
      d.l_disc(i, static_cast<int>(r)) =
          check_binary_cell(rows[i][ild[r]], ld_names[r], i + 1);
    for (std::size_t r = 0; r < ilc.size(); ++r)
      d.l_cont(i, static_cast<int>(r)) = rows[i][ilc[r]];
  }
  d.validate();
  return d;
}

void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  out << d.y_name << ',' << d.a_name;
  for (const auto& nm : d.m_names) out << ',' << nm;
  for (const auto& nm : d.ld_names) out << ',' << nm;
  for (const auto& nm : d.lc_names) out << ',' << nm;
  out << '\n';
  for (int i = 0; i < d.n(); ++i) {
    out << format_double(d.y(i)) << ',' << format_double(d.a(i));
    for (int q = 0; q < d.q(); ++q) out << ',' << format_double(d.m(i, q));
    for (int r = 0; r < d.p1(); ++r) out << ',' << format_double(d.l_disc(i, r));
    for (int r = 0; r < d.p2(); ++r) out << ',' << format_double(d.l_cont(i, r));
    out << '\n';
  }
}

// ---- json converters ------------------------------------------------------

namespace {

json reg_prior_to_json(const RegressionPrior& p) {
  return json{{"coef_mean", vec_to_json(p.coef_mean)},
              {"coef_var", vec_to_json(p.coef_var)},
              {"a0", p.a0},
              {"b0", p.b0},
              {"binary", p.binary}};
}

RegressionPrior reg_prior_from_json(const json& j) {
  RegressionPrior p;
  p.coef_mean = vec_from_json(j.at("coef_mean"));
  p.coef_var = vec_from_json(j.at("coef_var"));
  p.a0 = j.at("a0").get<double>();
  p.b0 = j.at("b0").get<double>();
  p.binary = j.at("binary").get<bool>();
  return p;
}

}  // namespace

json hyper_to_json(const Hyperparams& h) {
  json j;
  j["beta_a0"] = h.beta_a0;
  j["beta_b0"] = h.beta_b0;
  j["nu0"] = h.nu0;
  j["c0"] = h.c0;
  j["mu0"] = vec_to_json(h.mu0);
  j["tau0sq"] = vec_to_json(h.tau0sq);
  j["outcome"] = reg_prior_to_json(h.outcome);
  json med = json::array();
  for (const auto& m : h.mediators) med.push_back(reg_prior_to_json(m));
  j["mediators"] = med;
  j["alpha_theta_prior"] = {{"shape", h.prior_alpha_theta.shape}, {"rate", h.prior_alpha_theta.rate}};
  j["alpha_omega_prior"] = {{"shape", h.prior_alpha_omega.shape}, {"rate", h.prior_alpha_omega.rate}};
  j["alpha_psi_prior"] = {{"shape", h.prior_alpha_psi.shape}, {"rate", h.prior_alpha_psi.rate}};
  return j;
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.beta_a0 = j.at("beta_a0").get<double>();
  h.beta_b0 = j.at("beta_b0").get<double>();
  h.nu0 = j.at("nu0").get<double>();
  h.c0 = j.at("c0").get<double>();
  h.mu0 = vec_from_json(j.at("mu0"));
  h.tau0sq = vec_from_json(j.at("tau0sq"));
  h.outcome = reg_prior_from_json(j.at("outcome"));
  h.mediators.clear();
  for (const auto& m : j.at("mediators")) h.mediators.push_back(reg_prior_from_json(m));
  auto gp = [](const json& g) {
    return GammaPrior{g.at("shape").get<double>(), g.at("rate").get<double>()};
  };
  h.prior_alpha_theta = gp(j.at("alpha_theta_prior"));
  h.prior_alpha_omega = gp(j.at("alpha_omega_prior"));
  h.prior_alpha_psi = gp(j.at("alpha_psi_prior"));
  return h;
}

json sampler_config_to_json(const SamplerConfig& c) {
  json j;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  j["thinning"] = c.thinning;
  j["aux_clusters"] = c.aux_clusters;
  j["seed"] = c.seed;
  j["init_alpha"] = {{"theta", c.init_alpha.theta},
                     {"omega", c.init_alpha.omega},
                     {"psi", c.init_alpha.psi}};
  j["update_concentrations"] = c.update_concentrations;
  return j;
}

SamplerConfig sampler_config_from_json(const json& j) {
  expect_keys(j,
              {"iterations", "burn_in", "thinning", "aux_clusters", "seed",
               "init_alpha", "update_concentrations"},
              "sampler");
  SamplerConfig c;
  if (j.contains("iterations")) c.iterations = j.at("iterations").get<int>();
  if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<int>();
  if (j.contains("thinning")) c.thinning = j.at("thinning").get<int>();
  if (j.contains("aux_clusters")) c.aux_clusters = j.at("aux_clusters").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("init_alpha")) {
    const json& a = j.at("init_alpha");
    expect_keys(a, {"theta", "omega", "psi"}, "sampler.init_alpha");
    if (a.contains("theta")) c.init_alpha.theta = a.at("theta").get<double>();
    if (a.contains("omega")) c.init_alpha.omega = a.at("omega").get<double>();
    if (a.contains("psi")) c.init_alpha.psi = a.at("psi").get<double>();
  }
  if (j.contains("update_concentrations"))
    c.update_concentrations = j.at("update_concentrations").get<bool>();
  return c;
}

json scenario_to_json(const scenario::ScenarioSpec& s) {
  json j;
  j["id"] = s.id;
  j["n"] = s.n;
  j["p1"] = s.p1;
  j["p2"] = s.p2;
  j["Q"] = s.Q;
  j["zero_treatment_effects"] = s.zero_treatment_effects;
  j["custom"] = s.custom;
  return j;
}

scenario::ScenarioSpec scenario_from_json(const json& j) {
  expect_keys(j, {"id", "n", "p1", "p2", "Q", "zero_treatment_effects", "custom"},
              "scenario");
  scenario::ScenarioSpec s = scenario::ScenarioSpec::canonical(
      j.at("id").get<int>(), j.at("n").get<int>());
  if (j.contains("p1")) s.p1 = j.at("p1").get<int>();
  if (j.contains("p2")) s.p2 = j.at("p2").get<int>();
  if (j.contains("Q")) s.Q = j.at("Q").get<int>();
  if (j.contains("zero_treatment_effects"))
    s.zero_treatment_effects = j.at("zero_treatment_effects").get<bool>();
  const scenario::ScenarioSpec canon =
      scenario::ScenarioSpec::canonical(s.id, s.n);
  s.custom = s.p1 != canon.p1 || s.p2 != canon.p2 || s.Q != canon.Q ||
             s.zero_treatment_effects;
  s.validate();
  return s;
}

json draw_to_json(const PosteriorDraw& d) {
  json j;
  j["iteration"] = d.iteration;
  j["alpha"] = {{"theta", d.alpha.theta}, {"omega", d.alpha.omega}, {"psi", d.alpha.psi}};
  json assign = json::array();
  for (const auto& a : d.state.assign)
    assign.push_back(json::array({a.j, a.l, a.u}));
  j["assign"] = assign;
  json ys = json::array();
  for (const auto& yc : d.state.ys) {
    json jy;
    jy["count"] = yc.count;
    jy["theta"] = {{"coef", vec_to_json(yc.theta.coef)},
                   {"var", yc.theta.var},
                   {"binary", yc.theta.binary}};
    json ms = json::array();
    for (const auto& mc : yc.ms) {
      json jm;
      jm["count"] = mc.count;
      json kinds = json::array();
      for (ColKind k : mc.omega.kinds) kinds.push_back(k == ColKind::Binary ? 1 : 0);
      jm["omega"] = {{"coef", mat_cols_to_json(mc.omega.coef)},
                     {"var", vec_to_json(mc.omega.var)},
                     {"kinds", kinds}};
      json xs = json::array();
      for (const auto& xc : mc.xs)
        xs.push_back(json{{"count", xc.count},
                          {"psi",
                           {{"g", vec_to_json(xc.psi.g)},
                            {"h", vec_to_json(xc.psi.h)},
                            {"f", vec_to_json(xc.psi.f)}}}});
      jm["xs"] = xs;
      ms.push_back(std::move(jm));
    }
    jy["ms"] = ms;
    ys.push_back(std::move(jy));
  }
  j["ys"] = ys;
  return j;
}

PosteriorDraw draw_from_json(const json& j) {
  PosteriorDraw d;
  d.iteration = j.at("iteration").get<long>();
  d.alpha.theta = j.at("alpha").at("theta").get<double>();
  d.alpha.omega = j.at("alpha").at("omega").get<double>();
  d.alpha.psi = j.at("alpha").at("psi").get<double>();
  for (const auto& a : j.at("assign"))
    d.state.assign.push_back({a[0].get<int>(), a[1].get<int>(), a[2].get<int>()});
  for (const auto& jy : j.at("ys")) {
    YCluster yc;
    yc.count = jy.at("count").get<int>();
    yc.theta.coef = vec_from_json(jy.at("theta").at("coef"));
    yc.theta.var = jy.at("theta").at("var").get<double>();
    yc.theta.binary = jy.at("theta").at("binary").get<bool>();
    for (const auto& jm : jy.at("ms")) {
      MCluster mc;
      mc.count = jm.at("count").get<int>();
      mc.omega.coef = mat_cols_from_json(jm.at("omega").at("coef"));
      mc.omega.var = vec_from_json(jm.at("omega").at("var"));
      for (const auto& k : jm.at("omega").at("kinds"))
        mc.omega.kinds.push_back(k.get<int>() == 1 ? ColKind::Binary
                                                   : ColKind::Continuous);
      for (const auto& jx : jm.at("xs")) {
        XCluster xc;
        xc.count = jx.at("count").get<int>();
        xc.psi.g = vec_from_json(jx.at("psi").at("g"));
        xc.psi.h = vec_from_json(jx.at("psi").at("h"));
        xc.psi.f = vec_from_json(jx.at("psi").at("f"));
        mc.xs.push_back(std::move(xc));
      }
      yc.ms.push_back(std::move(mc));
    }
    d.state.ys.push_back(std::move(yc));
  }
  return d;
}

json truth_to_json(const scenario::TruthRecord& t) {
  json j;
  j["scenario_id"] = t.scenario_id;
  j["source"] = t.source;
  json vals, errs;
  for (const auto& [k, v] : t.values) vals[k] = v;
  for (const auto& [k, v] : t.mc_err) errs[k] = v;
  j["values"] = vals;
  j["mc_err"] = errs;
  return j;
}

// ---- draw log ---------------------------------------------------------

json DrawLogMeta::to_json() const {
  json j;
  j["version"] = version;
  j["n"] = n;
  j["Q"] = Q;
  j["p1"] = p1;
  j["p2"] = p2;
  j["schema"] = schema.to_json();
  j["hyper"] = hyper_to_json(hyper);
  j["sampler"] = sampler_config_to_json(sampler);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j;
}

DrawLogMeta DrawLogMeta::from_json(const json& j) {
  DrawLogMeta m;
  m.version = j.at("version").get<int>();
  if (m.version != 1)
    throw std::runtime_error("draw log: unsupported version " +
                             std::to_string(m.version));
  m.n = j.at("n").get<int>();
  m.Q = j.at("Q").get<int>();
  m.p1 = j.at("p1").get<int>();
  m.p2 = j.at("p2").get<int>();
  m.schema = SchemaSpec::from_json(j.at("schema"));
  m.hyper = hyper_from_json(j.at("hyper"));
  m.sampler = sampler_config_from_json(j.at("sampler"));
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_hash = j.at("config_hash").get<std::string>();
  return m;
}

struct DrawLogWriter::Impl {
  std::ofstream out;
};

DrawLogWriter::DrawLogWriter(const std::string& path, const DrawLogMeta& meta)
    : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary);
  if (!impl_->out) throw std::runtime_error("draw log: cannot write " + path);
  impl_->out.write(kDrawLogMagic, 8);
  const std::vector<std::uint8_t> bytes = json::to_msgpack(meta.to_json());
  write_u32(impl_->out, static_cast<std::uint32_t>(bytes.size()));
  impl_->out.write(reinterpret_cast<const char*>(bytes.data()),
                   static_cast<std::streamsize>(bytes.size()));
}

DrawLogWriter::~DrawLogWriter() = default;

void DrawLogWriter::append(const PosteriorDraw& draw) {
  const std::vector<std::uint8_t> bytes = json::to_msgpack(draw_to_json(draw));
  write_u32(impl_->out, static_cast<std::uint32_t>(bytes.size()));
  impl_->out.write(reinterpret_cast<const char*>(bytes.data()),
                   static_cast<std::streamsize>(bytes.size()));
}

void DrawLogWriter::close() {
  if (impl_->out.is_open()) impl_->out.close();
}

DrawLog read_draw_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("draw log: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kDrawLogMagic, 8) != 0)
    throw std::runtime_error("draw log: bad magic in " + path);
  DrawLog log;
  const std::uint32_t mlen = read_u32(in);
  std::vector<std::uint8_t> buf(mlen);
  in.read(reinterpret_cast<char*>(buf.data()), mlen);
  if (!in) throw std::runtime_error("draw log: truncated metadata");
  log.meta = DrawLogMeta::from_json(json::from_msgpack(buf));
  while (true) {
    in.peek();
    if (in.eof()) break;
    const std::uint32_t rlen = read_u32(in);
    buf.resize(rlen);
    in.read(reinterpret_cast<char*>(buf.data()), rlen);
    if (!in) throw std::runtime_error("draw log: truncated record");
    log.draws.push_back(draw_from_json(json::from_msgpack(buf)));
  }
  return log;
}

// ---- reports -----------------------------------------------------------

void write_effects_report(const std::string& base_path, const EffectsReport& rep) {
  json j;
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back(json{{"effect", r.name},
                        {"mean", r.mean},
                        {"ci_low", r.ci_low},
                        {"ci_high", r.ci_high},
                        {"mc_se", r.mc_se}});
  j["effects"] = rows;
  j["provenance"] = rep.provenance;
  std::ofstream js(base_path + ".json", std::ios::binary);
  if (!js) throw std::runtime_error("report: cannot write " + base_path + ".json");
  js << j.dump(2) << '\n';

  std::ofstream cs(base_path + ".csv", std::ios::binary);
  if (!cs) throw std::runtime_error("report: cannot write " + base_path + ".csv");
  cs << "effect,mean,ci_low,ci_high,mc_se\n";
  for (const auto& r : rep.rows)
    cs << r.name << ',' << format_double(r.mean) << ',' << format_double(r.ci_low)
       << ',' << format_double(r.ci_high) << ',' << format_double(r.mc_se)
       << '\n';
}

void write_replicate_table(const std::string& base_path,
                           const scenario::ReplicateTable& table,
                           const std::vector<Effect>& effects) {
  std::ofstream rs(base_path + ".reps.csv", std::ios::binary);
  if (!rs) throw std::runtime_error("report: cannot write " + base_path + ".reps.csv");
  rs << "rep,ok,effect,estimate,ci_low,ci_high,error\n";
  for (const auto& row : table.rows) {
    if (!row.ok) {
      rs << row.rep << ",0,,,,," << row.error << '\n';
      continue;
    }
    for (const auto& e : effects) {
      const auto& s = row.est.at(e.name());
      rs << row.rep << ",1," << e.name() << ',' << format_double(s.mean) << ','
         << format_double(s.ci_low) << ',' << format_double(s.ci_high) << ",\n";
    }
  }
  std::ofstream ss(base_path + ".summary.csv", std::ios::binary);
  if (!ss) throw std::runtime_error("report: cannot write " + base_path + ".summary.csv");
  ss << "effect,truth,mean_estimate,bias,avg_ci_width,coverage,ok_reps\n";
  for (const auto& ag : table.aggregate)
    ss << ag.effect << ',' << format_double(ag.truth) << ','
       << format_double(ag.mean_estimate) << ',' << format_double(ag.bias) << ','
       << format_double(ag.avg_ci_width) << ',' << format_double(ag.coverage)
       << ',' << ag.ok_reps << '\n';
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bnpmed::io
