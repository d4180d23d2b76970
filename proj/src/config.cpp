#include "bilayer/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "bilayer/error.hpp"
#include "bilayer/records.hpp"

namespace bilayer {

std::string_view to_string(Model m) { return m == Model::bilayer ? "bilayer" : "trig"; }

SymbolKind symbol_kind(Model m) {
  return m == Model::bilayer ? SymbolKind::bilayer_mass : SymbolKind::trig_warp;
}

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& msg) {
  throw Error(Errc::config, key + ": " + msg);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& key, std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    fail(key, "expected a real number, got '" + std::string(s) + "'");
  return v;
}

long long to_integer(const std::string& key, std::string_view s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(key, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

// Accepts "a", "bi", "a+bi", "a-bi".
cd to_complex(const std::string& key, std::string s) {
  std::erase(s, ' ');
  if (s.empty()) fail(key, "expected a complex number");
  if (s.back() != 'i') return {to_real(key, s), 0.0};
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;)
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  auto imag = [&](std::string_view t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    if (t.front() == '+') t.remove_prefix(1);
    return to_real(key, t);
  };
  if (split == std::string::npos) return {0.0, imag(s)};
  return {to_real(key, std::string_view(s).substr(0, split)), imag(std::string_view(s).substr(split))};
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(key, trim(item)));
  if (out.empty()) fail(key, "expected a comma-separated list");
  return out;
}

void flatten(const boost::property_tree::ptree& tree, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  for (const auto& [k, child] : tree) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (child.empty()) {
      if (!out.emplace(key, trim(child.data())).second) fail(key, "duplicate key");
    } else {
      flatten(child, key, out);
    }
  }
}

bool power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::config, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig c;
  flatten(tree, "", c.raw);

  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& dst) -> Setter { return [&dst](auto& k, auto& v) { dst = to_real(k, v); }; };
  auto integer = [](int& dst) -> Setter {
    return [&dst](auto& k, auto& v) { dst = static_cast<int>(to_integer(k, v)); };
  };
  auto text_of = [](std::string& dst) -> Setter { return [&dst](auto&, auto& v) { dst = v; }; };
  const std::map<std::string, Setter> setters = {
      {"schema", integer(c.schema)},
      {"model",
       [&](auto& k, auto& v) {
         if (v == "bilayer") c.model = Model::bilayer;
         else if (v == "trig") c.model = Model::trig;
         else fail(k, "must be 'bilayer' or 'trig'");
       }},
      {"m", real(c.m)},
      {"q", real(c.q)},
      {"seed",
       [&](auto& k, auto& v) {
         const long long s = to_integer(k, v);
         if (s < 0) fail(k, "must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"grid.n", integer(c.grid_n)},
      {"grid.l", real(c.grid_l)},
      {"potential.family",
       [&](auto& k, auto& v) {
         try {
           c.potential.family = parse_potential_family(v);
         } catch (const Error&) {
           fail(k, "must be gaussian-scalar, gaussian-jordan or two-bump");
         }
       }},
      {"potential.amplitude", [&](auto& k, auto& v) { c.potential.amplitude = to_complex(k, v); }},
      {"potential.width", real(c.potential.width)},
      {"window.re_min", real(c.window.re_min)},
      {"window.re_max", real(c.window.re_max)},
      {"window.im_min", real(c.window.im_min)},
      {"window.im_max", real(c.window.im_max)},
      {"window.n_re", integer(c.window.n_re)},
      {"window.n_im", integer(c.window.n_im)},
      {"critical.tol", real(c.critical_tol)},
      {"fermi.lambda", real(c.fermi_lambda)},
      {"fermi.step", real(c.fermi_step)},
      {"decay.curve", text_of(c.decay_curve)},
      {"decay.lambda", real(c.decay_lambda)},
      {"decay.center", text_of(c.decay_center)},
      {"decay.cutoff_width", real(c.decay_cutoff_width)},
      {"decay.r_min", real(c.decay_r_min)},
      {"decay.r_max", real(c.decay_r_max)},
      {"decay.n_radii", integer(c.decay_n_radii)},
      {"decay.directions", integer(c.decay_directions)},
      {"cancellation.rho_min", real(c.rho_min)},
      {"cancellation.rho_max", real(c.rho_max)},
      {"cancellation.n", integer(c.rho_n)},
      {"eig.method", text_of(c.eig_method)},
      {"eig.localization_min", real(c.localization_min)},
      {"eig.im_floor", real(c.im_floor)},
      {"bs.localize", text_of(c.bs_localize)},
      {"bs.delta", real(c.bs_delta)},
      {"sweep.lambdas", [&](auto& k, auto& v) { c.lambdas = to_list(k, v); }},
      {"sweep.t_min", real(c.t_min)},
      {"sweep.t_max", real(c.t_max)},
      {"sweep.n_t", integer(c.n_t)},
      {"sweep.alpha", real(c.alpha)},
      {"sweep.epsilon", real(c.epsilon)},
      {"bound.constant", real(c.constant)},
      {"bound.v1_constant", real(c.v1_constant)},
  };
  for (const auto& [k, v] : c.raw) {
    const auto it = setters.find(k);
    if (it == setters.end()) fail(k, "unknown key");
    it->second(k, v);
  }

  if (!c.raw.contains("schema")) fail("schema", "missing; expected schema = " + std::to_string(kConfigSchema));
  if (c.schema != kConfigSchema) fail("schema", "unsupported version " + std::to_string(c.schema));
  if (!(c.m >= 0.0)) fail("m", "must be non-negative");
  if (c.model == Model::trig && c.m != 0.0) fail("m", "must be 0 for model = trig");
  if (!power_of_two(c.grid_n) || c.grid_n < 16 || c.grid_n > 256)
    fail("grid.n", "must be a power of two in [16, 256]");
  if (!(c.grid_l >= 4.0 && c.grid_l <= 64.0)) fail("grid.l", "must lie in [4, 64]");
  if (!(c.potential.width > 0.0)) fail("potential.width", "must be positive");
  if (!(c.q >= 1.0 && c.q <= 1.5)) fail("q", "must lie in [1, 3/2]");
  if (!(c.window.re_max > c.window.re_min)) fail("window.re_max", "must exceed window.re_min");
  if (!(c.window.im_max >= c.window.im_min)) fail("window.im_max", "must not be below window.im_min");
  if (c.window.n_re < 2) fail("window.n_re", "must be at least 2");
  if (c.window.n_im < 1) fail("window.n_im", "must be at least 1");
  if (!(c.critical_tol > 0.0 && c.critical_tol <= 1e-6)) fail("critical.tol", "must lie in (0, 1e-6]");
  if (!(c.fermi_lambda > 0.0) || std::abs(c.fermi_lambda - 1.0 / 16.0) <= 1e-9)
    fail("fermi.lambda", "must be positive and avoid 1/16");
  if (!(c.fermi_step > 0.0 && c.fermi_step <= 0.05)) fail("fermi.step", "must lie in (0, 0.05]");
  if (c.decay_curve != "circle" && c.decay_curve != "level") fail("decay.curve", "must be 'circle' or 'level'");
  if (c.decay_center != "none" && c.decay_center != "degenerate")
    fail("decay.center", "must be 'none' or 'degenerate'");
  if (!(c.decay_lambda > 0.0) || std::abs(c.decay_lambda - 1.0 / 16.0) <= 1e-9)
    fail("decay.lambda", "must be positive and avoid 1/16");
  if (!(c.decay_cutoff_width > 0.0)) fail("decay.cutoff_width", "must be positive");
  if (!(c.decay_r_min > 0.0) || !(c.decay_r_max >= 100.0 * c.decay_r_min * (1.0 - 1e-12)))
    fail("decay.r_max", "radii must span at least two decades");
  if (c.decay_n_radii < 2) fail("decay.n_radii", "must be at least 2");
  if (c.decay_directions < 64) fail("decay.directions", "must be at least 64");
  if (!(c.rho_min >= 1e-3 && c.rho_max <= 1e3 && c.rho_min < c.rho_max))
    fail("cancellation.rho_min", "range must lie inside [1e-3, 1e3]");
  if (c.rho_n < 200) fail("cancellation.n", "must be at least 200");
  if (c.eig_method != "dense" && c.eig_method != "bs-scan") fail("eig.method", "must be 'dense' or 'bs-scan'");
  if (!(c.localization_min >= 0.0 && c.localization_min <= 1.0))
    fail("eig.localization_min", "must lie in [0, 1]");
  if (!(c.im_floor >= 0.0)) fail("eig.im_floor", "must be non-negative");
  if (c.bs_localize != "none" && c.bs_localize != "saddles" && c.bs_localize != "critical")
    fail("bs.localize", "must be 'none', 'saddles' or 'critical'");
  if (c.bs_localize != "none" && c.model != Model::trig) fail("bs.localize", "requires model = trig");
  if (!(c.bs_delta > 0.0 && c.bs_delta <= 0.2)) fail("bs.delta", "must lie in (0, 0.2]");
  for (double l : c.lambdas) {
    if (!(l > 0.0)) fail("sweep.lambdas", "entries must be positive");
  }
  if (!(c.t_min > 0.0 && c.t_max > c.t_min && c.t_max < 1.0)) fail("sweep.t_min", "need 0 < t_min < t_max < 1");
  if (c.n_t < 2) fail("sweep.n_t", "must be at least 2");
  if (!(c.alpha == 0.0 || c.alpha >= 1.0)) fail("sweep.alpha", "must be 0 (automatic) or >= 1");
  if (!(c.epsilon > 0.0)) fail("sweep.epsilon", "must be positive");
  if (!(c.constant > 0.0)) fail("bound.constant", "must be positive");
  if (!(c.v1_constant > 0.0)) fail("bound.v1_constant", "must be positive");

  std::string canon;
  for (const auto& [k, v] : c.raw) canon += k + "=" + v + "\n";
  c.hash = fnv1a_hex(canon);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bilayer
