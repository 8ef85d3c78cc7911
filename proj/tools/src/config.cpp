#include "wfboot_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace wfboot::cli {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view text, const std::string& key) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key, "expected a real number, got '" + t + "'");
  return value;
}

long long parse_int(std::string_view text, const std::string& key) {
  const std::string t = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key, "expected an integer, got '" + t + "'");
  return value;
}

std::vector<double> parse_list(std::string_view text, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(part, key));
  return out;
}

std::vector<PanelSize> parse_sizes(std::string_view text, const std::string& key) {
  std::vector<PanelSize> sizes;
  for (const auto& part : split(text, ',')) {
    const auto x = part.find_first_of("xX");
    if (x == std::string::npos) throw ConfigError(key, "sizes are written TxN, got '" + part + "'");
    const auto T = parse_int(part.substr(0, x), key);
    const auto N = parse_int(part.substr(x + 1), key);
    if (T < 2 || N < 1) throw ConfigError(key, "size '" + part + "' is too small");
    sizes.push_back({static_cast<int>(T), static_cast<int>(N)});
  }
  return sizes;
}

KeyValues parse_config_text(std::string_view text) {
  KeyValues kv;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    if (section.empty()) throw ConfigError(where, "key outside of any [section]");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError(where, "empty key");
    kv[section + "." + key] = trim(std::string_view(body).substr(eq + 1));
  }
  return kv;
}

KeyValues load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || o.find('.') > eq)
      throw ConfigError(o, "overrides are written section.key=value");
    kv[trim(std::string_view(o).substr(0, eq))] = trim(std::string_view(o).substr(eq + 1));
  }
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.sizes",       "experiment.replications",   "experiment.master_seed",
      "experiment.estimators",  "experiment.max_failure_fraction",
      "dgp.r",                  "dgp.p",                     "dgp.alphas",
      "dgp.d",                  "dgp.H_true",                "dgp.rho_fw",
      "dgp.sigma_w2",           "dgp.sigma_eps2",            "dgp.gamma0",
      "dgp.beta",               "dgp.error_variance",        "bootstrap.B",
      "bootstrap.multiplier_law", "bootstrap.max_dropped_fraction",
      "jackknife.S",            "jackknife.max_retries",     "grid.rho_fw",
      "grid.alphas",            "grid.d"};
  return keys;
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  const std::string& raw(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(key, "missing required key '" + key + "'");
    return it->second;
  }
  double real(const std::string& key, double fallback) const {
    return has(key) ? parse_double(raw(key), key) : fallback;
  }
  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? parse_int(raw(key), key) : fallback;
  }
  std::vector<double> list(const std::string& key) const { return parse_list(raw(key), key); }

 private:
  const KeyValues& kv_;
};

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Matrix parse_matrix(const std::string& text, const std::string& key) {
  const auto rows = split(text, ';');
  std::vector<std::vector<double>> values;
  for (const auto& row : rows) values.push_back(parse_list(row, key));
  const auto cols = values.front().size();
  Matrix m(static_cast<Index>(values.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != cols) throw ConfigError(key, "matrix rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = values[i][j];
  }
  return m;
}

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

std::string join_reals(const std::vector<double>& v, std::string_view sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += fmt_real(v[i]);
  }
  return out;
}

std::string join_reals(const Vector& v) { return join_reals(std::vector<double>(v.begin(), v.end())); }

void rethrow_as_config(const ValidationError& e, const std::string& fallback_key) {
  const std::string what = e.what();
  const auto colon = what.find(':');
  const std::string key = colon == std::string::npos ? fallback_key : what.substr(0, colon);
  throw ConfigError(key, colon == std::string::npos ? what : trim(what.substr(colon + 1)));
}

}  // namespace

std::string panel_label(const DgpConfig& dgp) {
  std::string alpha;
  for (std::size_t k = 0; k < dgp.alphas.size(); ++k) {
    if (k) alpha += "-";
    alpha += fmt::format("{:g}", dgp.alphas[k]);
  }
  return fmt::format("rho{:g}_alpha{}", dgp.rho_fw, alpha);
}

SimulationPlan resolve_plan(const KeyValues& kv) {
  for (const auto& [key, value] : kv)
    if (!known_keys().count(key)) throw ConfigError(key, "unknown configuration key");

  const Reader in(kv);
  SimulationPlan plan;
  ExperimentConfig& ex = plan.experiment;

  if (in.has("experiment.sizes")) ex.sizes = parse_sizes(in.raw("experiment.sizes"), "experiment.sizes");
  ex.replications = static_cast<int>(in.integer("experiment.replications", ex.replications));
  if (in.has("experiment.master_seed")) {
    const auto seed = in.integer("experiment.master_seed", 0);
    if (seed < 0) throw ConfigError("experiment.master_seed", "must be non-negative");
    ex.master_seed = static_cast<std::uint64_t>(seed);
  }
  ex.max_failure_fraction = in.real("experiment.max_failure_fraction", ex.max_failure_fraction);
  if (in.has("experiment.estimators")) {
    const std::string list = in.raw("experiment.estimators");
    if (trim(list) != "all") {
      for (Estimator e : kAllEstimators) ex.estimators.set(e, false);
      for (const auto& name : split(list, ',')) {
        const auto e = parse_estimator(name);
        if (!e) throw ConfigError("experiment.estimators", "unknown estimator '" + name + "'");
        ex.estimators.set(*e, true);
      }
    }
  }

  ex.bootstrap.B = static_cast<int>(in.integer("bootstrap.B", ex.bootstrap.B));
  if (in.has("bootstrap.multiplier_law")) {
    const std::string law = in.raw("bootstrap.multiplier_law");
    if (law == "rademacher")
      ex.bootstrap.multiplier_law = MultiplierLaw::Rademacher;
    else if (law == "normal")
      ex.bootstrap.multiplier_law = MultiplierLaw::StandardNormal;
    else
      throw ConfigError("bootstrap.multiplier_law", "expected 'rademacher' or 'normal', got '" + law + "'");
  }
  ex.bootstrap.max_dropped_fraction =
      in.real("bootstrap.max_dropped_fraction", ex.bootstrap.max_dropped_fraction);
  ex.jackknife.S = static_cast<int>(in.integer("jackknife.S", ex.jackknife.S));
  ex.jackknife.max_retries = static_cast<int>(in.integer("jackknife.max_retries", ex.jackknife.max_retries));

  DgpConfig& dgp = ex.dgp;
  dgp.r = static_cast<int>(in.integer("dgp.r", dgp.r));
  dgp.p = static_cast<int>(in.integer("dgp.p", dgp.p));
  if (dgp.r < 1) throw ConfigError("dgp.r", "must be at least 1");
  if (dgp.p < 1) throw ConfigError("dgp.p", "must be at least 1");
  const bool grid = in.has("grid.alphas") || in.has("grid.d") || in.has("grid.rho_fw");
  if (!grid || !in.has("grid.alphas")) dgp.alphas = in.list("dgp.alphas");
  if (!grid || !in.has("grid.d")) dgp.d = in.list("dgp.d");
  if (in.has("dgp.H_true"))
    dgp.H_true = parse_matrix(in.raw("dgp.H_true"), "dgp.H_true");
  else if (dgp.r != 2)
    throw ConfigError("dgp.H_true", "missing required key 'dgp.H_true' (no default for r != 2)");
  dgp.rho_fw = in.real("dgp.rho_fw", dgp.rho_fw);
  dgp.sigma_w2 = in.real("dgp.sigma_w2", dgp.sigma_w2);
  dgp.sigma_eps2 = in.real("dgp.sigma_eps2", dgp.sigma_eps2);
  dgp.gamma0 = in.has("dgp.gamma0") ? to_vector(in.list("dgp.gamma0")) : Vector::Ones(dgp.r);
  dgp.beta = in.has("dgp.beta") ? to_vector(in.list("dgp.beta")) : Vector::Ones(dgp.p);
  if (in.has("dgp.error_variance")) {
    const auto b = in.list("dgp.error_variance");
    if (b.size() != 2) throw ConfigError("dgp.error_variance", "expected 'lo, hi'");
    dgp.error_var_lo = b[0];
    dgp.error_var_hi = b[1];
  }

  std::vector<double> rhos{dgp.rho_fw};
  std::vector<std::vector<double>> alpha_cells{dgp.alphas}, d_cells{dgp.d};
  if (in.has("grid.rho_fw")) {
    rhos.clear();
    for (const auto& part : split(in.raw("grid.rho_fw"), '|')) rhos.push_back(parse_double(part, "grid.rho_fw"));
  }
  if (in.has("grid.alphas")) {
    alpha_cells.clear();
    for (const auto& part : split(in.raw("grid.alphas"), '|')) alpha_cells.push_back(parse_list(part, "grid.alphas"));
  }
  if (in.has("grid.d")) {
    d_cells.clear();
    for (const auto& part : split(in.raw("grid.d"), '|')) d_cells.push_back(parse_list(part, "grid.d"));
  }
  if (alpha_cells.size() != d_cells.size()) {
    if (d_cells.size() == 1)
      d_cells.assign(alpha_cells.size(), d_cells.front());
    else if (alpha_cells.size() == 1)
      alpha_cells.assign(d_cells.size(), alpha_cells.front());
    else
      throw ConfigError("grid.d", "needs one entry per grid.alphas cell");
  }

  for (double rho : rhos) {
    for (std::size_t c = 0; c < alpha_cells.size(); ++c) {
      PanelSpec spec;
      spec.dgp = dgp;
      spec.dgp.rho_fw = rho;
      spec.dgp.alphas = alpha_cells[c];
      spec.dgp.d = d_cells[c];
      spec.label = panel_label(spec.dgp);
      plan.panels.push_back(std::move(spec));
    }
  }

  for (const auto& spec : plan.panels) {
    ExperimentConfig check = ex;
    check.dgp = spec.dgp;
    try {
      check.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      rethrow_as_config(e, "experiment");
    }
  }
  ex.dgp = plan.panels.front().dgp;
  return plan;
}

KeyValues canonical_entries(const SimulationPlan& plan) {
  const ExperimentConfig& ex = plan.experiment;
  KeyValues kv;
  std::string sizes;
  for (std::size_t i = 0; i < ex.sizes.size(); ++i)
    sizes += (i ? "," : "") + fmt::format("{}x{}", ex.sizes[i].T, ex.sizes[i].N);
  kv["experiment.sizes"] = sizes;
  kv["experiment.replications"] = std::to_string(ex.replications);
  kv["experiment.master_seed"] = std::to_string(ex.master_seed);
  kv["experiment.max_failure_fraction"] = fmt_real(ex.max_failure_fraction);
  std::string est;
  for (Estimator e : ex.estimators.list()) est += (est.empty() ? "" : ",") + std::string(to_string(e));
  kv["experiment.estimators"] = est;
  kv["bootstrap.B"] = std::to_string(ex.bootstrap.B);
  kv["bootstrap.multiplier_law"] =
      ex.bootstrap.multiplier_law == MultiplierLaw::Rademacher ? "rademacher" : "normal";
  kv["bootstrap.max_dropped_fraction"] = fmt_real(ex.bootstrap.max_dropped_fraction);
  kv["jackknife.S"] = std::to_string(ex.jackknife.S);
  kv["jackknife.max_retries"] = std::to_string(ex.jackknife.max_retries);

  for (std::size_t i = 0; i < plan.panels.size(); ++i) {
    const DgpConfig& d = plan.panels[i].dgp;
    const std::string pre = fmt::format("panel.{}.", i);
    kv[pre + "label"] = plan.panels[i].label;
    kv[pre + "r"] = std::to_string(d.r);
    kv[pre + "p"] = std::to_string(d.p);
    kv[pre + "alphas"] = join_reals(d.alphas);
    kv[pre + "d"] = join_reals(d.d);
    std::string h;
    for (Index row = 0; row < d.H_true.rows(); ++row)
      h += (row ? ";" : "") + join_reals(Vector(d.H_true.row(row).transpose()));
    kv[pre + "H_true"] = h;
    kv[pre + "rho_fw"] = fmt_real(d.rho_fw);
    kv[pre + "sigma_w2"] = fmt_real(d.sigma_w2);
    kv[pre + "sigma_eps2"] = fmt_real(d.sigma_eps2);
    kv[pre + "gamma0"] = join_reals(d.gamma0);
    kv[pre + "beta"] = join_reals(d.beta);
    kv[pre + "error_variance"] = fmt_real(d.error_var_lo) + "," + fmt_real(d.error_var_hi);
  }
  return kv;
}

std::string config_digest(const SimulationPlan& plan) {
  std::string canonical;
  for (const auto& [k, v] : canonical_entries(plan)) canonical += k + "=" + v + "\n";

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace wfboot::cli
