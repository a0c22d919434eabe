#include "pfto/driver.hpp"

#include "pfto/objective.hpp"
#include "pfto/vtk.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace pfto {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class OutputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "output_error"; }
};

// Exclusive ownership of an output directory for the lifetime of a command.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".pfto.lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw OutputError("output directory is locked or not writable: " + path_.string());
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string snapshot_name(const char* field, long k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04ld.vtk", field, k);
  return buf;
}

void write_fields(const fs::path& dir, const std::string& phi_name, const std::string& u_name, const Mesh& mesh,
                  const Vector& phi, const Vector& u) {
  write_vtk(dir / phi_name, mesh, {{"phi", phi}});
  write_vtk(dir / u_name, mesh, {{"phi", phi}}, {{"u", u}});
}

const char* kIterationHeader = "k,j_eps,criterion,alpha,lambda,pdas_iters,zeta\n";

std::string iteration_row(const IterationRecord& r) {
  return std::to_string(r.k) + "," + format_number(r.j) + "," + format_number(r.criterion) + "," +
         format_number(r.alpha) + "," + format_number(r.lambda) + "," + std::to_string(r.pdas_iters) + "," +
         format_number(r.zeta) + "\n";
}

struct Loaded {
  RunConfig config;
  std::shared_ptr<const Mesh> mesh;
  Vector phi0;
};

Loaded load(const CommandOptions& options) {
  if (options.threads < 1) throw InvalidInput("--threads must be at least 1");
  // Assembly and factorization are sequential; the flag only caps Eigen's
  // internal parallelism when it is compiled with OpenMP.
  Eigen::setNbThreads(options.threads);
  Loaded l;
  l.config = parse_config(read_file(options.config_path));
  l.mesh = std::make_shared<const Mesh>(l.config.mesh());
  if (l.config.traction != Vec2{} && l.mesh->count_edges(BoundaryTag::Neumann) == 0)
    throw ConfigError("traction is nonzero but the neumann predicate selects no boundary edge", "domain",
                      "neumann");
  l.phi0 = initial_phase(*l.mesh, l.config.beta);
  return l;
}

double first_eps(const RunConfig& c) { return c.eps ? *c.eps : c.eps_list.front(); }

int report_failure(const CommandOptions& options, const Error& e, int code, std::ostream& log) {
  ordered_json j;
  j["status"] = "error";
  j["kind"] = e.kind();
  j["message"] = e.what();
  if (auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    if (!ce->section().empty()) j["section"] = ce->section();
    if (!ce->key().empty()) j["key"] = ce->key();
    if (ce->line() > 0) j["line"] = ce->line();
  }
  if (auto* se = dynamic_cast<const SolverFailure*>(&e); se && std::isfinite(se->residual()))
    j["residual"] = se->residual();
  j["exit_code"] = code;
  log << "error (" << e.kind() << "): " << e.what() << "\n";
  if (!options.out_dir.empty()) {
    try {
      std::error_code ec;
      fs::create_directories(options.out_dir, ec);
      write_json(options.out_dir / "error.json", j);
    } catch (const Error&) {
      // nowhere to put the record; stderr already has it
    }
  }
  return code;
}

template <class Body>
int guarded(const CommandOptions& options, std::ostream& log, Body body) {
  try {
    return body();
  } catch (const OutputError& e) {
    return report_failure(options, e, kExitOutput, log);
  } catch (const InvalidInput& e) {
    return report_failure(options, e, kExitConfig, log);
  } catch (const Error& e) {
    return report_failure(options, e, kExitNumerical, log);
  } catch (const std::exception& e) {
    return report_failure(options, Error(e.what()), kExitNumerical, log);
  }
}

ordered_json design_json(const Design& d) {
  ordered_json j;
  j["j_eps"] = d.j;
  j["lambda"] = d.lambda;
  j["vertices"] = d.mesh->num_vertices();
  j["triangles"] = d.mesh->num_triangles();
  j["h_min"] = d.mesh->size_range()[0];
  j["mesh_generation"] = d.mesh_generation;
  return j;
}

}  // namespace

int validate_command(const CommandOptions& options, std::ostream& log) {
  CommandOptions no_out = options;
  no_out.out_dir.clear();
  return guarded(no_out, log, [&] {
    Loaded l = load(options);
    const RunConfig& c = l.config;
    Problem p = c.problem(first_eps(c));
    ElasticityOperator op(*l.mesh, l.phi0, p.model, p.solver);
    Vector u = op.state(p.loads);
    if (!u.allFinite()) throw SolverFailure("state solve at the start field produced non-finite values");
    double j = evaluate_objective(p.objective, *l.mesh, l.phi0, u, p.loads);
    log << "config ok: " << l.mesh->num_vertices() << " vertices, " << l.mesh->num_triangles() << " triangles, "
        << l.mesh->count_edges(BoundaryTag::Dirichlet) << " dirichlet and " << l.mesh->count_edges(BoundaryTag::Neumann)
        << " neumann edges\n";
    log << "start field: j_eps = " << format_number(j) << "\n";
    return int(kExitOk);
  });
}

int run_command(const CommandOptions& options, std::ostream& log) {
  return guarded(options, log, [&] {
    if (options.out_dir.empty()) throw InvalidInput("--out is required");
    Loaded l = load(options);
    const RunConfig& c = l.config;
    if (!c.eps) throw ConfigError("run needs [objective] eps", "objective", "eps");
    DirectoryLock lock(options.out_dir);
    const fs::path& dir = options.out_dir;
    write_text(dir / "config.echo.cfg", echo_config(c));

    Problem p = c.problem(*c.eps);
    {
      ElasticityOperator op(*l.mesh, l.phi0, p.model, p.solver);
      write_fields(dir, snapshot_name("phi", 0), snapshot_name("u", 0), *l.mesh, l.phi0, op.state(p.loads));
    }
    auto csv = open_out(dir / "iterations.csv");
    csv << kIterationHeader;
    MinimizeResult r = minimize(p, l.mesh, l.phi0, c.optimizer(l.mesh), [&](const IterationRecord& rec, const Design& d) {
      csv << iteration_row(rec);
      long k = rec.k + 1;
      if (c.output_every > 0 && k % c.output_every == 0)
        write_fields(dir, snapshot_name("phi", k), snapshot_name("u", k), *d.mesh, d.phi, d.u);
    });
    csv.close();
    if (!csv) throw OutputError("failed writing iterations.csv");
    write_fields(dir, "phi_final.vtk", "u_final.vtk", *r.design.mesh, r.design.phi, r.design.u);

    ordered_json s;
    s["status"] = "ok";
    s["stop_reason"] = to_string(r.reason);
    s["iterations"] = r.history.size();
    s["criterion"] = r.criterion;
    s["design"] = design_json(r.design);
    s["E_eps"] = ginzburg_landau(*r.design.mesh, r.design.phi, *c.eps);
    write_json(dir / "summary.json", s);
    log << "stopped (" << to_string(r.reason) << ") after " << r.history.size()
        << " iterations: j_eps = " << format_number(r.design.j) << ", lambda = " << format_number(r.design.lambda)
        << "\n";
    return int(kExitOk);
  });
}

int sweep_command(const CommandOptions& options, std::ostream& log) {
  return guarded(options, log, [&] {
    if (options.out_dir.empty()) throw InvalidInput("--out is required");
    Loaded l = load(options);
    const RunConfig& c = l.config;
    if (c.eps_list.empty()) throw ConfigError("sweep needs [sweep] eps", "sweep", "eps");
    DirectoryLock lock(options.out_dir);
    const fs::path& dir = options.out_dir;
    write_text(dir / "config.echo.cfg", echo_config(c));

    std::vector<std::ofstream> logs;
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
      logs.push_back(open_out(dir / ("iterations_" + std::to_string(i) + ".csv")));
      logs.back() << kIterationHeader;
    }
    Problem p = c.problem(c.eps_list.front());
    SweepResult r = epsilon_sweep(p, l.mesh, l.phi0, c.eps_list, c.optimizer(l.mesh),
                                  [&](std::size_t i, const IterationRecord& rec, const Design&) {
                                    logs[i] << iteration_row(rec);
                                  });
    for (auto& f : logs) f.close();

    {
      auto csv = open_out(dir / "sweep.csv");
      csv << "eps,j_eps,E_eps,lambda,l1_error,iters\n";
      for (const SweepRecord& rec : r.records)
        csv << format_number(rec.eps) << "," << format_number(rec.j) << "," << format_number(rec.energy) << ","
            << format_number(rec.lambda) << "," << format_number(rec.l1_error) << "," << rec.iterations << "\n";
    }
    for (std::size_t i = 0; i < r.designs.size(); ++i) {
      const Design& d = r.designs[i];
      std::string tag = std::to_string(i);
      write_fields(dir, "phi_eps" + tag + ".vtk", "u_eps" + tag + ".vtk", *d.mesh, d.phi, d.u);
    }

    ordered_json s;
    if (!r.records.empty()) {
      const double m = profile_error_model(1.0, r.e0);
      // gnuplot data for the three convergence plots
      auto l1 = open_out(dir / "l1_error.dat");
      auto cost = open_out(dir / "cost.dat");
      auto lam = open_out(dir / "lambda.dat");
      l1 << "# eps l1_error m*eps\n";
      cost << "# eps j_eps E_eps\n";
      lam << "# eps lambda\n";
      for (const SweepRecord& rec : r.records) {
        l1 << format_number(rec.eps) << " " << format_number(rec.l1_error) << " " << format_number(m * rec.eps) << "\n";
        cost << format_number(rec.eps) << " " << format_number(rec.j) << " " << format_number(rec.energy) << "\n";
        lam << format_number(rec.eps) << " " << format_number(rec.lambda) << "\n";
      }
      const SweepRecord& last = r.records.back();
      s["e0"] = r.e0;
      s["slope_m"] = m;
      s["perimeter_estimate"] = perimeter_estimate(r.e0);
      s["tangency_ratio"] = last.l1_error / (m * last.eps);
      ordered_json runs = ordered_json::array();
      for (std::size_t i = 0; i < r.records.size(); ++i) {
        ordered_json j = design_json(r.designs[i]);
        j["eps"] = r.records[i].eps;
        j["stop_reason"] = to_string(r.records[i].reason);
        j["iterations"] = r.records[i].iterations;
        runs.push_back(j);
      }
      s["runs"] = runs;
    }
    if (!r.error.empty()) {
      s["status"] = "error";
      s["message"] = r.error;
      write_json(dir / "summary.json", s);
      throw SolverFailure("sweep aborted after " + std::to_string(r.records.size()) + " run(s): " + r.error);
    }
    s["status"] = "ok";
    write_json(dir / "summary.json", s);
    for (const SweepRecord& rec : r.records)
      log << "eps " << format_number(rec.eps) << ": j_eps = " << format_number(rec.j)
          << ", lambda = " << format_number(rec.lambda) << ", l1 = " << format_number(rec.l1_error) << "\n";
    log << "e0 = " << format_number(r.e0) << "\n";
    return int(kExitOk);
  });
}

}  // namespace pfto
