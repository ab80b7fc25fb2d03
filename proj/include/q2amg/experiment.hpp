#ifndef Q2AMG_EXPERIMENT_HPP
#define Q2AMG_EXPERIMENT_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "q2amg/config.hpp"
#include "q2amg/diagnostics.hpp"
#include "q2amg/matrix_market.hpp"
#include "q2amg/picard.hpp"

namespace q2amg {

enum class RunMode { Stokes, NavierStokes, Tau1Sweep, InfSup, Mac1d };

inline RunMode parse_mode(const std::string& s) {
  if (s == "stokes") return RunMode::Stokes;
  if (s == "navier-stokes") return RunMode::NavierStokes;
  if (s == "tau1-sweep") return RunMode::Tau1Sweep;
  if (s == "infsup") return RunMode::InfSup;
  if (s == "mac1d") return RunMode::Mac1d;
  throw ConfigError("mode", "unknown mode '" + s + "'");
}

inline std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::Stokes: return "stokes";
    case RunMode::NavierStokes: return "navier-stokes";
    case RunMode::Tau1Sweep: return "tau1-sweep";
    case RunMode::InfSup: return "infsup";
    case RunMode::Mac1d: return "mac1d";
  }
  return "?";
}

/// A linear saddle-point problem ready for the hierarchy setup.
struct Problem {
  std::string name;
  int refinement = 0;
  SparseMatrix A, B;  // velocity block and divergence block
  Vector rhs;         // full right-hand side
  std::vector<Point> coords_v, coords_p;
  std::vector<int> colocation;
  bool pressure_nullspace = false;
  bool nonsymmetric = false;
  SparseMatrix M_v, M_p;  // empty when unavailable
  int picard_steps = 0;
  double picard_residual = 0.0;

  [[nodiscard]] int n_v() const { return A.n_rows; }
  [[nodiscard]] int n_p() const { return B.n_rows; }
  [[nodiscard]] SparseMatrix full_operator() const {
    return block_2x2(A, transpose(B), B, SparseMatrix(), n_v(), n_p());
  }
  [[nodiscard]] LevelInput level_input() const {
    return {full_operator(), n_v(), coords_v, coords_p, colocation, pressure_nullspace};
  }
};

inline ProblemSpec problem_spec(const ExperimentConfig& cfg, int refinement) {
  ProblemSpec s;
  s.domain = cfg.domain;
  s.refinement = refinement;
  s.viscosity = cfg.viscosity;
  s.channel_length = cfg.channel_length;
  s.obstacle = cfg.obstacle;
  return s;
}

namespace detail {

inline Problem problem_from_system(const SaddleSystem& sys, const Mesh& mesh, std::string name, int refinement) {
  Problem p;
  p.name = std::move(name);
  p.refinement = refinement;
  p.A = sys.A;
  p.B = sys.B;
  p.rhs = sys.full_rhs();
  p.coords_v = mesh.q2_coords;
  p.coords_p = mesh.q1_coords;
  p.colocation = sys.colocation;
  p.pressure_nullspace = sys.pressure_nullspace;
  const MassMatrices mm = assemble_mass_matrices(mesh);
  p.M_v = mm.velocity;
  p.M_p = mm.pressure;
  return p;
}

}  // namespace detail

/// Stokes problems use unit viscosity (the Stokes operator only rescales the pressure otherwise).
inline Problem make_stokes_problem(const ExperimentConfig& cfg, int refinement) {
  const ProblemSpec spec = problem_spec(cfg, refinement);
  const Mesh mesh = build_mesh(spec);
  const BoundaryCondition bc = default_boundary_conditions(mesh, spec);
  return detail::problem_from_system(assemble_stokes(mesh, bc), mesh, to_string(cfg.domain), refinement);
}

/// Converges Picard with direct inner solves and keeps the final linearization.
inline Problem make_navier_stokes_problem(const ExperimentConfig& cfg, int refinement) {
  const ProblemSpec spec = problem_spec(cfg, refinement);
  const Mesh mesh = build_mesh(spec);
  const BoundaryCondition bc = default_boundary_conditions(mesh, spec);
  const PicardResult pr = picard_solve(mesh, bc, cfg.viscosity, direct_solve, cfg.picard_tol, cfg.max_picard);
  Problem p = detail::problem_from_system(pr.system, mesh, to_string(cfg.domain), refinement);
  p.nonsymmetric = true;
  p.picard_steps = static_cast<int>(pr.history.size()) - 1;
  p.picard_residual = pr.history.back();
  return p;
}

/// Writes A.mtx, B.mtx, f.vec, coords.txt (velocity nodes, then pressure
/// nodes) and, when present, Mv.mtx and Mp.mtx.
inline void export_problem(const Problem& p, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_matrix_market((d / "A.mtx").string(), p.A);
  write_matrix_market((d / "B.mtx").string(), p.B);
  write_vector((d / "f.vec").string(), p.rhs);
  write_coordinates((d / "coords.txt").string(), p.coords_v, p.coords_p);
  if (p.M_v.n_rows > 0) write_matrix_market((d / "Mv.mtx").string(), p.M_v);
  if (p.M_p.n_rows > 0) write_matrix_market((d / "Mp.mtx").string(), p.M_p);
}

/// Reads the files written by export_problem. Co-location is recovered from
/// coincident coordinates; the pressure null space from B^T 1 = 0.
inline Problem import_problem(const std::string& dir) {
  const std::filesystem::path d(dir);
  Problem p;
  p.name = "import";
  p.A = read_matrix_market((d / "A.mtx").string());
  p.B = read_matrix_market((d / "B.mtx").string());
  p.rhs = read_vector((d / "f.vec").string());
  const std::vector<Point> pts = read_coordinates((d / "coords.txt").string());
  if (p.A.n_rows != p.A.n_cols || p.A.n_rows % 2 != 0)
    throw Error((d / "A.mtx").string() + ": velocity block must be square with even size");
  if (p.B.n_cols != p.A.n_rows) throw Error((d / "B.mtx").string() + ": column count differs from A");
  if (static_cast<int>(p.rhs.size()) != p.A.n_rows + p.B.n_rows)
    throw Error((d / "f.vec").string() + ": length differs from the system size");
  const int ns = p.A.n_rows / 2;
  if (static_cast<int>(pts.size()) != ns + p.B.n_rows)
    throw Error((d / "coords.txt").string() + ": expected " + std::to_string(ns + p.B.n_rows) + " points");
  p.coords_v.assign(pts.begin(), pts.begin() + ns);
  p.coords_p.assign(pts.begin() + ns, pts.end());
  std::map<std::pair<double, double>, int> where;
  for (int v = 0; v < ns; ++v) where.emplace(std::make_pair(p.coords_v[v].x, p.coords_v[v].y), v);
  for (const auto& q : p.coords_p) {
    auto it = where.find({q.x, q.y});
    p.colocation.push_back(it == where.end() ? -1 : it->second);
  }
  const Vector ones(p.B.n_rows, 1.0);
  const Vector bt1 = multiply(transpose(p.B), ones);
  p.pressure_nullspace = norm_inf(bt1) <= 1e-12 * std::max(1.0, max_abs(p.B)) * p.B.n_rows;
  const SparseMatrix at = transpose(p.A);
  p.nonsymmetric = max_abs(add(p.A, scaled(at, -1.0))) > 1e-12 * max_abs(p.A);
  if (std::filesystem::exists(d / "Mv.mtx")) p.M_v = read_matrix_market((d / "Mv.mtx").string());
  if (std::filesystem::exists(d / "Mp.mtx")) p.M_p = read_matrix_market((d / "Mp.mtx").string());
  return p;
}

// ------------------------------------------------------------- solving

struct RunRecord {
  std::string problem;
  int refinement = 0;
  std::string smoother;
  double tau1 = 0.0;
  int dofs = 0;
  double complexity = 0.0;
  int levels = 0;
  int iterations = 0;
  bool converged = false;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  int picard_steps = 0;
  std::vector<std::string> warnings;
};

struct SolveOutcome {
  RunRecord record;
  Hierarchy hierarchy;
  GmresResult gmres;
};

/// Hierarchy setup plus right-preconditioned GMRES from a zero initial guess.
inline SolveOutcome solve_problem(const Problem& p, const HierarchyParams& hp, const GmresOptions& opt,
                                  const std::string& smoother_label) {
  using clock = std::chrono::steady_clock;
  SolveOutcome out;
  const LevelInput in = p.level_input();
  const auto t0 = clock::now();
  out.hierarchy = setup_hierarchy(in, hp);
  const auto t1 = clock::now();
  const Vector x0(p.rhs.size(), 0.0);
  out.gmres = gmres(matrix_operator(in.A), vcycle_preconditioner(out.hierarchy), p.rhs, x0, opt);
  const auto t2 = clock::now();
  RunRecord& r = out.record;
  r.problem = p.name;
  r.refinement = p.refinement;
  r.smoother = smoother_label;
  r.tau1 = hp.coarsen.tau1;
  r.dofs = in.A.n_rows;
  r.complexity = operator_complexity(out.hierarchy);
  r.levels = out.hierarchy.n_levels();
  r.iterations = out.gmres.iterations;
  r.converged = out.gmres.converged;
  r.setup_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  r.picard_steps = p.picard_steps;
  r.warnings = out.hierarchy.warnings;
  return out;
}

// ------------------------------------------------------------- reports

inline std::string iteration_label(const RunRecord& r) {
  return r.converged ? std::to_string(r.iterations) : std::to_string(r.iterations) + "+";
}

inline std::string format_fixed(double v, int digits) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", digits, v);
  return buf.data();
}

inline std::string records_csv(const std::vector<RunRecord>& rs) {
  std::ostringstream o;
  o << "problem,refinement,smoother,tau1,dofs,complexity,levels,iterations,converged,picard_steps,setup_s,solve_s\n";
  for (const auto& r : rs)
    o << r.problem << "," << r.refinement << "," << r.smoother << "," << format_fixed(r.tau1, 4) << "," << r.dofs
      << "," << format_fixed(r.complexity, 4) << "," << r.levels << "," << r.iterations << ","
      << (r.converged ? 1 : 0) << "," << r.picard_steps << "," << format_fixed(r.setup_seconds, 3) << ","
      << format_fixed(r.solve_seconds, 3) << "\n";
  return o.str();
}

/// Plain-text table, columns padded to their widest cell.
inline std::string aligned_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < w.size(); ++c) w[c] = std::max(w[c], r[c].size());
  std::ostringstream o;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < w.size(); ++c) {
      const std::string s = c < cells.size() ? cells[c] : "";
      o << (c ? "  " : "") << std::string(w[c] - s.size(), ' ') << s;
    }
    o << "\n";
  };
  line(header);
  std::size_t total = 0;
  for (auto x : w) total += x;
  o << std::string(total + 2 * (w.size() - 1), '-') << "\n";
  for (const auto& r : rows) line(r);
  return o.str();
}

inline std::string records_table(const std::vector<RunRecord>& rs, bool show_tau1) {
  std::vector<std::string> head{"Problem", "m", "Smoother"};
  if (show_tau1) head.push_back("tau1");
  for (const char* h : {"Dofs", "Complexity", "Levels", "Its", "Setup", "Solve"}) head.emplace_back(h);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rs) {
    std::vector<std::string> row{r.problem, std::to_string(r.refinement), r.smoother};
    if (show_tau1) row.push_back(format_fixed(r.tau1, 2));
    row.push_back(std::to_string(r.dofs));
    row.push_back(format_fixed(r.complexity, 2));
    row.push_back(std::to_string(r.levels));
    row.push_back(iteration_label(r));
    row.push_back(format_fixed(r.setup_seconds, 2));
    row.push_back(format_fixed(r.solve_seconds, 2));
    rows.push_back(std::move(row));
  }
  return aligned_table(head, rows);
}

/// Per level: one line per pressure and per scalar velocity node with its
/// coordinates and whether it survives to the next level.
inline void write_splitting(const Hierarchy& h, const std::string& path) {
  auto out = detail::open_out(path);
  out << "level,kind,index,x,y,coarse,extra\n";
  for (int l = 0; l + 1 < h.n_levels(); ++l) {
    const Level& lv = h.levels[l];
    std::vector<char> cp(lv.n_p, 0), cv(lv.n_scalar(), 0), extra(lv.n_p, 1);
    for (int c : lv.coarse_pressures) cp[c] = 1;
    for (int c : lv.coarse_velocities) cv[c] = 1;
    for (int c : lv.initial_pressures) extra[c] = 0;
    for (int i = 0; i < lv.n_p; ++i)
      out << l << ",p," << i << "," << detail::format_real(lv.coords_p[i].x) << ","
          << detail::format_real(lv.coords_p[i].y) << "," << int(cp[i]) << "," << int(cp[i] && extra[i]) << "\n";
    for (int i = 0; i < lv.n_scalar(); ++i)
      out << l << ",v," << i << "," << detail::format_real(lv.coords_v[i].x) << ","
          << detail::format_real(lv.coords_v[i].y) << "," << int(cv[i]) << ",0\n";
  }
  if (!out) throw Error("write failed: " + path);
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = detail::open_out(path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

// ------------------------------------------------------------- modes

struct RunOptions {
  std::string out_dir = "out";
  bool dump_matrices = false;
  bool dump_splitting = false;
};

struct ModeReport {
  std::string csv;
  std::string table;
  std::vector<RunRecord> records;
};

inline Problem load_problem(const ExperimentConfig& cfg, int refinement, bool navier_stokes) {
  if (cfg.source == ProblemSource::Import) {
    if (navier_stokes) throw ConfigError("problem.source", "navier-stokes mode needs a generated problem");
    Problem p = import_problem(cfg.import_dir);
    p.refinement = refinement;
    return p;
  }
  return navier_stokes ? make_navier_stokes_problem(cfg, refinement) : make_stokes_problem(cfg, refinement);
}

namespace detail {

inline std::string tag(const Problem& p) { return p.name + "_m" + std::to_string(p.refinement); }

inline void dump(const Problem& p, const RunOptions& opt) {
  if (opt.dump_matrices) export_problem(p, (std::filesystem::path(opt.out_dir) / tag(p)).string());
}

}  // namespace detail

inline ModeReport run_solver_sweep(const ExperimentConfig& cfg, RunMode mode, const RunOptions& opt) {
  ModeReport rep;
  const bool ns = mode == RunMode::NavierStokes;
  std::vector<int> refinements = cfg.refinements;
  std::vector<double> taus{cfg.hierarchy.coarsen.tau1};
  if (mode == RunMode::Tau1Sweep) {
    refinements.resize(1);
    taus = cfg.tau1_values;
  }
  if (cfg.source == ProblemSource::Import) refinements.resize(1);
  for (int m : refinements) {
    const Problem p = load_problem(cfg, m, ns);
    detail::dump(p, opt);
    for (double tau : taus)
      for (std::size_t k = 0; k < cfg.smoothers.size(); ++k) {
        HierarchyParams hp = cfg.params_for(cfg.smoothers[k], p.nonsymmetric);
        hp.coarsen.tau1 = tau;
        SolveOutcome s = solve_problem(p, hp, cfg.gmres, cfg.smoothers[k].label());
        if (opt.dump_splitting && k == 0) {
          std::string name = detail::tag(p);
          if (mode == RunMode::Tau1Sweep) name += "_tau" + format_fixed(tau, 2);
          std::filesystem::create_directories(opt.out_dir);
          write_splitting(s.hierarchy, (std::filesystem::path(opt.out_dir) / ("splitting_" + name + ".csv")).string());
        }
        rep.records.push_back(std::move(s.record));
      }
  }
  rep.csv = records_csv(rep.records);
  rep.table = records_table(rep.records, mode == RunMode::Tau1Sweep);
  return rep;
}

inline ModeReport run_infsup(const ExperimentConfig& cfg, const RunOptions& opt) {
  ModeReport rep;
  std::ostringstream csv;
  csv << "refinement,level,rows,cols,sigma_min\n";
  std::vector<std::vector<std::string>> rows;
  std::vector<int> refinements = cfg.refinements;
  if (cfg.source == ProblemSource::Import) refinements.resize(1);
  for (int m : refinements) {
    const Problem p = load_problem(cfg, m, false);
    if (p.M_v.n_rows == 0 || p.M_p.n_rows == 0) throw Error("infsup: mass matrices unavailable for " + p.name);
    detail::dump(p, opt);
    const HierarchyParams hp = cfg.params_for(cfg.smoothers.front(), p.nonsymmetric);
    const Hierarchy h = setup_hierarchy(p.level_input(), hp);
    if (opt.dump_splitting) {
      std::filesystem::create_directories(opt.out_dir);
      write_splitting(h, (std::filesystem::path(opt.out_dir) / ("splitting_" + detail::tag(p) + ".csv")).string());
    }
    const InfSupReport r = infsup_estimate(h, p.M_v, p.M_p);
    for (const auto& l : r.levels) {
      csv << m << "," << l.level << "," << l.rows << "," << l.cols << "," << format_fixed(l.sigma_min, 6) << "\n";
      rows.push_back({std::to_string(m), std::to_string(l.level), std::to_string(l.rows), std::to_string(l.cols),
                      format_fixed(l.sigma_min, 4)});
    }
  }
  rep.csv = csv.str();
  rep.table = aligned_table({"m", "Level", "Rows", "Cols", "sigma_min"}, rows);
  return rep;
}

struct Mac1dSummary {
  VelocityPlacement placement = VelocityPlacement::CoLocated;
  MacSchur schur;
  Vector eigenvector;
  int sign_changes = 0;
  int null_dimension = 0;
};

inline std::string to_string(VelocityPlacement p) {
  return p == VelocityPlacement::CoLocated ? "colocated" : "midpoint";
}

inline Mac1dSummary analyse_mac1d(int n, VelocityPlacement placement) {
  Mac1dSummary s;
  s.placement = placement;
  const Mac1dSystem sys = build_mac1d(n);
  s.schur = projected_mac_schur(sys, placement);
  s.eigenvector = second_eigenvector(s.schur.S);
  s.sign_changes = sign_changes(s.eigenvector);
  const SymmetricEigen e = symmetric_eigen(s.schur.S);
  const double top = std::abs(e.values.back());
  for (double v : e.values)
    if (std::abs(v) <= 1e-10 * top) ++s.null_dimension;
  return s;
}

inline ModeReport run_mac1d(const ExperimentConfig& cfg, const RunOptions& opt) {
  ModeReport rep;
  std::ostringstream csv;
  csv << "placement,n,coarse_pressures,sign_changes,null_dimension,middle_row_of_scaled_S_hat\n";
  std::vector<std::vector<std::string>> rows;
  std::ostringstream vec;
  vec << "placement,index,x,eigenvector\n";
  for (auto pl : {VelocityPlacement::CoLocated, VelocityPlacement::MidPoint}) {
    const Mac1dSummary s = analyse_mac1d(cfg.mac_n, pl);
    const DenseMatrix& sh = s.schur.S_hat;
    const int mid = sh.rows / 2;
    std::string row;
    for (int j = std::max(0, mid - 2); j <= std::min(sh.cols - 1, mid + 2); ++j)
      row += (row.empty() ? "" : " ") + format_fixed(sh(mid, j), 4);
    csv << to_string(pl) << "," << cfg.mac_n << "," << sh.rows << "," << s.sign_changes << "," << s.null_dimension
        << "," << row << "\n";
    rows.push_back({to_string(pl), std::to_string(cfg.mac_n), std::to_string(s.sign_changes),
                    std::to_string(s.null_dimension), row});
    for (int i = 0; i < static_cast<int>(s.eigenvector.size()); ++i)
      vec << to_string(pl) << "," << i << "," << format_fixed(s.schur.coarse_x_p[i], 2) << ","
          << format_fixed(s.eigenvector[i], 8) << "\n";
  }
  std::filesystem::create_directories(opt.out_dir);
  write_text((std::filesystem::path(opt.out_dir) / "mac1d_eigenvectors.csv").string(), vec.str());
  rep.csv = csv.str();
  rep.table = aligned_table({"Placement", "n", "Sign changes", "Null dim", "Middle row of 4*S_hat"}, rows);
  return rep;
}

/// Runs one mode and writes <mode>.csv and <mode>.txt into the output directory.
inline ModeReport run_experiment(const ExperimentConfig& cfg, RunMode mode, const RunOptions& opt) {
  ModeReport rep;
  switch (mode) {
    case RunMode::Stokes:
    case RunMode::NavierStokes:
    case RunMode::Tau1Sweep: rep = run_solver_sweep(cfg, mode, opt); break;
    case RunMode::InfSup: rep = run_infsup(cfg, opt); break;
    case RunMode::Mac1d: rep = run_mac1d(cfg, opt); break;
  }
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path d(opt.out_dir);
  write_text((d / (to_string(mode) + ".csv")).string(), rep.csv);
  write_text((d / (to_string(mode) + ".txt")).string(), rep.table);
  return rep;
}

}  // namespace q2amg

#endif  // Q2AMG_EXPERIMENT_HPP
