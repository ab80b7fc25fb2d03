#ifndef Q2AMG_CONFIG_HPP
#define Q2AMG_CONFIG_HPP

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "q2amg/hierarchy.hpp"
#include "q2amg/matrix_market.hpp"
#include "q2amg/mesh.hpp"

namespace q2amg {

class ConfigError : public Error {
public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config: " + field + ": " + what), field_(field) {}
  [[nodiscard]] const std::string& field() const { return field_; }

private:
  std::string field_;
};

/// One smoother entry such as vanka(1,1): kind plus pre/post sweep counts.
struct SmootherRun {
  SmootherKind kind = SmootherKind::Vanka;
  int pre = 1;
  int post = 1;

  [[nodiscard]] std::string label() const {
    return to_string(kind) + "(" + std::to_string(pre) + "," + std::to_string(post) + ")";
  }
};

enum class ProblemSource { Generate, Import };
enum class RestrictionMode { Auto, Transpose, Emin };

struct ExperimentConfig {
  // [problem]
  Domain domain = Domain::LidCavity;
  std::vector<int> refinements{8, 16, 32};
  double viscosity = 1.0;
  double channel_length = 5.0;
  Rect obstacle{1.75, 2.25, -0.25, 0.25};
  ProblemSource source = ProblemSource::Generate;
  std::string import_dir;

  // [coarsening], [emin], [smoother], [solver]
  HierarchyParams hierarchy;
  RestrictionMode restriction = RestrictionMode::Auto;
  std::vector<SmootherRun> smoothers{{SmootherKind::Vanka, 1, 1}, {SmootherKind::BraessSarazin, 2, 2}};
  GmresOptions gmres;
  double picard_tol = 1e-8;
  int max_picard = 50;

  // [sweep]
  std::vector<double> tau1_values{0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
  int mac_n = 17;

  /// Hierarchy parameters for one smoother entry; `nonsymmetric` selects the
  /// EMIN restriction under RestrictionMode::Auto.
  [[nodiscard]] HierarchyParams params_for(const SmootherRun& s, bool nonsymmetric) const {
    HierarchyParams p = hierarchy;
    p.smoother = s.kind;
    p.pre_sweeps = s.pre;
    p.post_sweeps = s.post;
    p.petrov_galerkin = restriction == RestrictionMode::Emin || (restriction == RestrictionMode::Auto && nonsymmetric);
    return p;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits on commas that are not inside parentheses.
inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

class ConfigReader {
public:
  explicit ConfigReader(const boost::property_tree::ptree& pt) : pt_(pt) {}

  bool has(const std::string& key) const { return pt_.get_child_optional(key).has_value(); }

  std::string text(const std::string& key) const {
    used_.insert(key);
    return trim(pt_.get<std::string>(key));
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(key, text(key));
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const std::string s = text(key);
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key, "expected an integer, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError(key, "expected an integer, got '" + s + "'");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = lower(text(key));
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(key, "expected a boolean, got '" + s + "'");
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(text(key))) out.push_back(parse_real(key, item));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const auto& item : split_list(text(key))) {
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(item, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != item.size()) throw ConfigError(key, "expected an integer list, got '" + item + "'");
      out.push_back(v);
    }
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
  }

  // Every key in the file must have been read.
  void reject_unknown() const {
    for (const auto& [section, body] : pt_) {
      if (body.empty()) throw ConfigError(section, "entries must be inside a [section]");
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError(full, "unknown key");
      }
    }
  }

private:
  static double parse_real(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a number, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError(key, "expected a number, got '" + s + "'");
    return v;
  }

  const boost::property_tree::ptree& pt_;
  mutable std::set<std::string> used_;
};

inline SmootherKind parse_smoother_kind(const std::string& field, const std::string& name) {
  const std::string n = lower(name);
  if (n == "vanka") return SmootherKind::Vanka;
  if (n == "bs" || n == "braess-sarazin" || n == "braess_sarazin") return SmootherKind::BraessSarazin;
  if (n == "ilu" || n == "ilu1") return SmootherKind::Ilu;
  throw ConfigError(field, "unknown smoother '" + name + "'");
}

}  // namespace detail

/// Entries look like "vanka(1,1)", "bs(2,2)" or a bare name (one sweep each side).
inline std::vector<SmootherRun> parse_smoother_list(const std::string& field, const std::string& text) {
  static const std::regex entry(R"(^([A-Za-z_\-0-9]+)\s*(?:\(\s*(\d+)\s*,\s*(\d+)\s*\))?$)");
  std::vector<SmootherRun> out;
  for (const auto& item : detail::split_list(text)) {
    std::smatch m;
    if (!std::regex_match(item, m, entry)) throw ConfigError(field, "cannot parse smoother entry '" + item + "'");
    SmootherRun r;
    r.kind = detail::parse_smoother_kind(field, m[1]);
    if (m[2].matched) {
      r.pre = std::stoi(m[2]);
      r.post = std::stoi(m[3]);
    }
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError(field, "no smoother given");
  return out;
}

inline ExperimentConfig parse_config(const boost::property_tree::ptree& pt) {
  const detail::ConfigReader rd(pt);
  ExperimentConfig c;

  if (rd.has("problem.domain")) {
    const std::string d = detail::lower(rd.text("problem.domain"));
    if (d == "cavity" || d == "lid-cavity" || d == "lidcavity") c.domain = Domain::LidCavity;
    else if (d == "step" || d == "backward-step") c.domain = Domain::BackwardStep;
    else if (d == "obstacle") c.domain = Domain::Obstacle;
    else throw ConfigError("problem.domain", "unknown domain '" + d + "'");
  }
  if (c.domain == Domain::Obstacle) c.channel_length = 8.0;
  c.refinements = rd.integers("problem.refinements", c.refinements);
  c.viscosity = rd.real("problem.viscosity", c.viscosity);
  c.channel_length = rd.real("problem.channel_length", c.channel_length);
  c.obstacle.x0 = rd.real("problem.obstacle_x0", c.obstacle.x0);
  c.obstacle.x1 = rd.real("problem.obstacle_x1", c.obstacle.x1);
  c.obstacle.y0 = rd.real("problem.obstacle_y0", c.obstacle.y0);
  c.obstacle.y1 = rd.real("problem.obstacle_y1", c.obstacle.y1);
  if (rd.has("problem.source")) {
    const std::string s = detail::lower(rd.text("problem.source"));
    if (s == "generate") c.source = ProblemSource::Generate;
    else if (s == "import") c.source = ProblemSource::Import;
    else throw ConfigError("problem.source", "expected generate or import, got '" + s + "'");
  }
  if (rd.has("problem.import_dir")) c.import_dir = rd.text("problem.import_dir");

  CoarsenParams& cp = c.hierarchy.coarsen;
  cp.tau1 = rd.real("coarsening.tau1", cp.tau1);
  cp.tau2 = rd.real("coarsening.tau2", cp.tau2);
  cp.omega_g = rd.real("coarsening.omega_g", cp.omega_g);
  cp.omega_o = rd.real("coarsening.omega_o", cp.omega_o);
  cp.extra_h2_threshold = rd.real("coarsening.extra_h2_threshold", cp.extra_h2_threshold);
  cp.extra_o_threshold = rd.real("coarsening.extra_o_threshold", cp.extra_o_threshold);
  cp.extra_points = rd.boolean("coarsening.extra_points", cp.extra_points);
  if (rd.has("coarsening.lumping")) {
    const std::string l = detail::lower(rd.text("coarsening.lumping"));
    if (l == "preserve-row-sums") cp.lumping = Lumping::PreserveRowSums;
    else if (l == "zero-row-sums") cp.lumping = Lumping::ZeroRowSums;
    else throw ConfigError("coarsening.lumping", "expected preserve-row-sums or zero-row-sums, got '" + l + "'");
  }
  c.hierarchy.coarse_threshold = rd.integer("coarsening.coarse_threshold", c.hierarchy.coarse_threshold);
  c.hierarchy.max_levels = rd.integer("coarsening.max_levels", c.hierarchy.max_levels);

  c.hierarchy.emin_iterations = rd.integer("emin.iterations", c.hierarchy.emin_iterations);
  if (rd.has("emin.restriction")) {
    const std::string r = detail::lower(rd.text("emin.restriction"));
    if (r == "auto") c.restriction = RestrictionMode::Auto;
    else if (r == "transpose") c.restriction = RestrictionMode::Transpose;
    else if (r == "emin") c.restriction = RestrictionMode::Emin;
    else throw ConfigError("emin.restriction", "expected auto, transpose or emin, got '" + r + "'");
  }

  if (rd.has("smoother.list")) c.smoothers = parse_smoother_list("smoother.list", rd.text("smoother.list"));
  c.hierarchy.vanka_omega = rd.real("smoother.vanka_omega", c.hierarchy.vanka_omega);
  c.hierarchy.bs_omega = rd.real("smoother.bs_omega", c.hierarchy.bs_omega);
  c.hierarchy.bs_inner_sweeps = rd.integer("smoother.bs_inner_sweeps", c.hierarchy.bs_inner_sweeps);
  c.hierarchy.ilu_level = rd.integer("smoother.ilu_level", c.hierarchy.ilu_level);
  c.hierarchy.ilu_rcm = rd.boolean("smoother.ilu_rcm", c.hierarchy.ilu_rcm);
  c.hierarchy.coarse_vanka_sweeps = rd.integer("smoother.coarse_vanka_sweeps", c.hierarchy.coarse_vanka_sweeps);
  c.hierarchy.coarse_vanka_omega = rd.real("smoother.coarse_vanka_omega", c.hierarchy.coarse_vanka_omega);

  c.gmres.rel_tol = rd.real("solver.tol", c.gmres.rel_tol);
  c.gmres.max_iter = rd.integer("solver.max_iter", c.gmres.max_iter);
  c.gmres.restart = rd.integer("solver.restart", c.gmres.restart);
  c.picard_tol = rd.real("solver.picard_tol", c.picard_tol);
  c.max_picard = rd.integer("solver.max_picard", c.max_picard);

  c.tau1_values = rd.reals("sweep.tau1_values", c.tau1_values);
  c.mac_n = rd.integer("sweep.mac_n", c.mac_n);

  rd.reject_unknown();

  // validation
  for (int r : c.refinements)
    if (r < 2 || r % 2 != 0) throw ConfigError("problem.refinements", "refinements must be even and >= 2");
  if (!(c.viscosity > 0.0)) throw ConfigError("problem.viscosity", "must be positive");
  if (!(c.channel_length > 0.0)) throw ConfigError("problem.channel_length", "must be positive");
  if (c.source == ProblemSource::Import && c.import_dir.empty())
    throw ConfigError("problem.import_dir", "required when problem.source = import");
  if (cp.tau1 < 0.0) throw ConfigError("coarsening.tau1", "must be nonnegative");
  if (cp.tau2 < 0.0) throw ConfigError("coarsening.tau2", "must be nonnegative");
  if (c.hierarchy.coarse_threshold < 1) throw ConfigError("coarsening.coarse_threshold", "must be positive");
  if (c.hierarchy.max_levels < 1) throw ConfigError("coarsening.max_levels", "must be positive");
  if (c.hierarchy.emin_iterations < 0) throw ConfigError("emin.iterations", "must be nonnegative");
  for (const auto& s : c.smoothers)
    if (s.pre < 0 || s.post < 0 || s.pre + s.post == 0)
      throw ConfigError("smoother.list", "sweep counts must be nonnegative and not both zero");
  if (!(c.hierarchy.vanka_omega > 0.0)) throw ConfigError("smoother.vanka_omega", "must be positive");
  if (!(c.hierarchy.bs_omega > 0.0)) throw ConfigError("smoother.bs_omega", "must be positive");
  if (c.hierarchy.bs_inner_sweeps < 1) throw ConfigError("smoother.bs_inner_sweeps", "must be at least 1");
  if (c.hierarchy.ilu_level < 0) throw ConfigError("smoother.ilu_level", "must be nonnegative");
  if (!(c.gmres.rel_tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
  if (c.gmres.max_iter < 1) throw ConfigError("solver.max_iter", "must be positive");
  if (c.gmres.restart < 0) throw ConfigError("solver.restart", "must be nonnegative");
  if (!(c.picard_tol > 0.0)) throw ConfigError("solver.picard_tol", "must be positive");
  for (double t : c.tau1_values)
    if (t < 0.0) throw ConfigError("sweep.tau1_values", "values must be nonnegative");
  if (c.mac_n < 5 || c.mac_n % 2 == 0) throw ConfigError("sweep.mac_n", "must be odd and >= 5");
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("<text>", e.message() + " at line " + std::to_string(e.line()));
  }
  return parse_config(pt);
}

inline ExperimentConfig load_config(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path, e.message() + " at line " + std::to_string(e.line()));
  }
  return parse_config(pt);
}

}  // namespace q2amg

#endif  // Q2AMG_CONFIG_HPP
