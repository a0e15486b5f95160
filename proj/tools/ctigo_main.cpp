// Command-line harness: builds precision models, runs exact and incomplete
// factorizations, tolerance sweeps and sampling, and writes every result as
// Matrix Market / CSV / PGM files.
//
//   ctigo build  --family rw1 --n 100 --out dir
//   ctigo factor --preset example9 --out dir
//   ctigo sweep  --preset paper-table-1 --out dir
//   ctigo sample --family spde_matern --nx 20 --ny 20 --seed 7 --out dir
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ctigo/ctigo.hpp"

namespace {

using namespace ctigo;

struct Config {
  std::string preset;
  std::string family;
  std::optional<index_t> n;
  std::optional<index_t> nx;
  std::optional<index_t> ny;
  std::optional<double> jitter;
  std::optional<double> kappa;
  std::optional<double> h11;
  std::optional<double> h12;
  std::optional<double> h22;
  std::vector<double> band;
  std::vector<double> taus;
  std::string conditioning = "identity";
  std::string obs_a;
  std::string obs_qeps;
  std::string obs_y;
  std::string approx_b;
  std::string approx_c;
  std::uint64_t seed = 1;
  std::string out;
  long draws = 1;
  index_t dense_limit = kDenseLimit;
};

void register_options(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--preset", cfg.preset,
                  "named parameter bundle: paper-table-1 | paper-table-2 | "
                  "example9 | spde1 | spde2");
  cmd->add_option("--family", cfg.family,
                  "example9 | rw1 | rw2 | poisson | toeplitz | spde_matern | "
                  "spde_aniso");
  cmd->add_option("--n", cfg.n, "size (rw/toeplitz) or mesh side (poisson)");
  cmd->add_option("--nx", cfg.nx, "grid width (SPDE families)");
  cmd->add_option("--ny", cfg.ny, "grid height (SPDE families)");
  cmd->add_option("--jitter", cfg.jitter, "diagonal jitter for rw1/rw2");
  cmd->add_option("--kappa", cfg.kappa, "SPDE range parameter");
  cmd->add_option("--h11", cfg.h11, "anisotropy tensor entry");
  cmd->add_option("--h12", cfg.h12, "anisotropy tensor entry");
  cmd->add_option("--h22", cfg.h22, "anisotropy tensor entry");
  cmd->add_option("--band", cfg.band, "toeplitz band values, diagonal first");
  cmd->add_option("--tau", cfg.taus, "dropping tolerance (repeatable)");
  cmd->add_option("--conditioning", cfg.conditioning,
                  "identity | gaussian_data | gmrf_approx");
  cmd->add_option("--obs-a", cfg.obs_a, "observation matrix (.mtx)");
  cmd->add_option("--obs-qeps", cfg.obs_qeps, "noise precision (.mtx)");
  cmd->add_option("--obs-y", cfg.obs_y, "observed data (.csv, one per line)");
  cmd->add_option("--approx-b", cfg.approx_b, "expansion b vector (.csv)");
  cmd->add_option("--approx-c", cfg.approx_c, "expansion c vector (.csv)");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--out", cfg.out, "output directory")->required();
  cmd->add_option("--draws", cfg.draws, "number of samples to draw");
  cmd->add_option("--dense-limit", cfg.dense_limit,
                  "largest n for dense covariance work");
}

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void apply_preset(Config& cfg) {
  if (cfg.preset.empty()) return;
  auto fill_taus = [&](std::vector<double> v) {
    if (cfg.taus.empty()) cfg.taus = std::move(v);
  };
  const std::vector<double> grid{0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  if (cfg.preset == "paper-table-1") {
    if (cfg.family.empty()) cfg.family = "rw1";
    if (!cfg.n) cfg.n = 100;
    fill_taus(grid);
  } else if (cfg.preset == "paper-table-2") {
    if (cfg.family.empty()) cfg.family = "poisson";
    if (!cfg.n) cfg.n = 10;
    fill_taus(grid);
  } else if (cfg.preset == "example9") {
    if (cfg.family.empty()) cfg.family = "example9";
    fill_taus({1e-4});
  } else if (cfg.preset == "spde1") {
    if (cfg.family.empty()) cfg.family = "spde_matern";
    if (!cfg.kappa) cfg.kappa = 0.3;
    fill_taus({1e-4});
  } else if (cfg.preset == "spde2") {
    if (cfg.family.empty()) cfg.family = "spde_aniso";
    if (!cfg.kappa) cfg.kappa = 0.1;
    fill_taus({1e-4});
  } else {
    throw usage_error("unknown preset: " + cfg.preset);
  }
}

struct Model {
  SparseMatrix q1;
  SparseMatrix q2;
  SparseMatrix q;        // q1 + q2
  DenseVector b;         // canonical vector of the conditioned field
  LowerFactor l1;
  SparseMatrix bottom;   // bottom block of the stacked matrix
  SparseMatrix stacked;  // [L1^T; bottom]
  index_t grid_nx = 0;   // nonzero for grid-shaped families
  index_t grid_ny = 0;
};

SparseMatrix build_family(Config& cfg) {
  const std::string& f = cfg.family;
  if (f == "example9") return build_example_q1();
  if (f == "rw1") {
    if (!cfg.n) cfg.n = 100;
    return build_rw1(*cfg.n, cfg.jitter.value_or(1e-3));
  }
  if (f == "rw2") {
    if (!cfg.n) cfg.n = 100;
    return build_rw2(*cfg.n, cfg.jitter.value_or(1e-3));
  }
  if (f == "poisson") {
    if (!cfg.n) cfg.n = 10;
    return build_poisson(*cfg.n);
  }
  if (f == "toeplitz") {
    if (!cfg.n) cfg.n = 100;
    if (cfg.band.empty()) cfg.band = {5.0, -1.0};
    return build_toeplitz_corner(*cfg.n, cfg.band);
  }
  if (f == "spde_matern") {
    if (!cfg.nx) cfg.nx = 20;
    if (!cfg.ny) cfg.ny = 20;
    return build_spde_matern(GridSpec(*cfg.nx, *cfg.ny),
                             cfg.kappa.value_or(0.3));
  }
  if (f == "spde_aniso") {
    if (!cfg.nx) cfg.nx = 20;
    if (!cfg.ny) cfg.ny = 20;
    const AnisotropyTensor H(cfg.h11.value_or(0.1), cfg.h12.value_or(0.05),
                             cfg.h22.value_or(0.1));
    return build_spde_aniso(GridSpec(*cfg.nx, *cfg.ny),
                            cfg.kappa.value_or(0.1), H);
  }
  if (f.empty()) throw usage_error("--family (or --preset) is required");
  throw usage_error("unknown family: " + f);
}

Model build_model(Config& cfg) {
  Model m;
  m.q1 = build_family(cfg);
  const index_t n = m.q1.nrows;
  m.l1 = cholesky(m.q1);

  if (cfg.conditioning == "identity") {
    m.q2 = identity(n);
    m.b = DenseVector(static_cast<std::size_t>(n), 0.0);
    m.bottom = identity(n);
  } else if (cfg.conditioning == "gaussian_data") {
    if (cfg.obs_a.empty() || cfg.obs_qeps.empty() || cfg.obs_y.empty()) {
      throw usage_error(
          "gaussian_data conditioning needs --obs-a, --obs-qeps and --obs-y");
    }
    const SparseMatrix aobs = read_matrix_market(cfg.obs_a);
    const SparseMatrix qeps = read_matrix_market(cfg.obs_qeps);
    const DenseVector y = read_vector_csv(cfg.obs_y);
    const CanonicalGmrf g = condition_on_gaussian_data(m.q1, aobs, qeps, y);
    m.q2 = observation_precision(aobs, qeps);
    m.b = g.b;
    m.bottom = matmul(transpose(cholesky(qeps).matrix), aobs);
  } else if (cfg.conditioning == "gmrf_approx") {
    if (cfg.approx_b.empty() || cfg.approx_c.empty()) {
      throw usage_error("gmrf_approx conditioning needs --approx-b and --approx-c");
    }
    const DenseVector bvec = read_vector_csv(cfg.approx_b);
    const DenseVector cvec = read_vector_csv(cfg.approx_c);
    m.b = gmrf_approximation(m.q1, bvec, cvec).b;
    // Q2 = diag(max(c, 0)); the bottom block is its square root, and zero
    // entries simply leave empty rows in the stack.
    DenseVector clamped(cvec.size()), root(cvec.size());
    for (std::size_t i = 0; i < cvec.size(); ++i) {
      clamped[i] = std::max(cvec[i], 0.0);
      root[i] = std::sqrt(clamped[i]);
    }
    m.q2 = diagonal(clamped);
    m.bottom = diagonal(root);
  } else {
    throw usage_error("unknown conditioning: " + cfg.conditioning);
  }
  m.q = add(m.q1, m.q2);
  m.stacked = vstack(transpose(m.l1.matrix), m.bottom);

  if (cfg.family == "poisson") {
    m.grid_nx = m.grid_ny = *cfg.n;
  } else if (cfg.family == "spde_matern" || cfg.family == "spde_aniso") {
    m.grid_nx = *cfg.nx;
    m.grid_ny = *cfg.ny;
  }
  return m;
}

std::filesystem::path ensure_out_dir(const Config& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string tau_tag(double tau) { return "R_tau" + format_double(tau); }

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << body;
}

/// Grayscale heatmap of a grid-shaped field.  Both sampling routes share the
/// normalization bounds, so identical fields give identical bytes.
GrayImage heatmap(const DenseVector& field, index_t nx, index_t ny, double lo,
                  double hi) {
  GrayImage img;
  img.width = nx;
  img.height = ny;
  img.pixels.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double t = (field[i] - lo) / span;
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(
        255.0 * std::clamp(t, 0.0, 1.0)));
  }
  return img;
}

int cmd_build(Config cfg) {
  apply_preset(cfg);
  const Model m = build_model(cfg);
  const auto dir = ensure_out_dir(cfg);
  write_matrix_market(m.q1, (dir / "Q1.mtx").string());
  write_matrix_market(m.q2, (dir / "Q2.mtx").string());
  write_matrix_market(m.q, (dir / "Q.mtx").string());
  std::cout << "wrote Q1.mtx Q2.mtx Q.mtx (n=" << m.q.nrows
            << ", nnz(Q)=" << m.q.nnz() << ") to " << dir.string() << "\n";
  return 0;
}

int cmd_factor(Config cfg) {
  apply_preset(cfg);
  if (cfg.taus.empty()) {
    throw usage_error("factor needs at least one --tau (or a preset)");
  }
  const Model m = build_model(cfg);
  const auto dir = ensure_out_dir(cfg);

  const LowerFactor L = cholesky(m.q);
  write_matrix_market(L.matrix, (dir / "L.mtx").string());
  write_matrix_market(m.stacked, (dir / "A.mtx").string());
  write_pgm(pattern_image(m.l1.matrix), (dir / "L1.pgm").string());
  write_pgm(pattern_image(m.bottom), (dir / "L2.pgm").string());
  write_pgm(pattern_image(L.matrix), (dir / "L.pgm").string());
  write_pgm(pattern_image(m.stacked), (dir / "A.pgm").string());

  for (double tau : cfg.taus) {
    const Factorization f = ctigo_factorize(m.stacked, DropRule::threshold(tau));
    const std::string tag = tau_tag(tau);
    write_matrix_market(f.factor.matrix, (dir / (tag + ".mtx")).string());
    write_pgm(pattern_image(f.factor.matrix), (dir / (tag + ".pgm")).string());
    std::cout << "tau=" << format_double(tau)
              << "  nnz(R)=" << f.factor.matrix.nnz()
              << "  nnz(L)=" << L.matrix.nnz()
              << "  dropped=" << f.factor.dropped_count << "\n";
  }
  return 0;
}

int cmd_sweep(Config cfg) {
  apply_preset(cfg);
  if (cfg.taus.empty()) {
    throw usage_error("sweep needs at least one --tau (or a preset)");
  }
  const Model m = build_model(cfg);
  const auto dir = ensure_out_dir(cfg);
  const LowerFactor L = cholesky(m.q);

  std::vector<FactorizationReport> reps;
  reps.reserve(cfg.taus.size());
  for (double tau : cfg.taus) {
    const auto t0 = std::chrono::steady_clock::now();
    const Factorization f = ctigo_factorize(m.stacked, DropRule::threshold(tau));
    const auto t1 = std::chrono::steady_clock::now();
    FactorizationReport rep = report(m.q, L, f.factor, tau, cfg.dense_limit);
    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    reps.push_back(rep);
  }
  // Measured times go to stdout only; the files must be byte-stable across
  // reruns of the same configuration.
  std::cout << reports_to_table(reps);
  for (auto& r : reps) r.wall_time_ms = 0.0;
  write_text(dir / "sweep.csv", reports_to_csv(reps));
  write_text(dir / "sweep.txt", reports_to_table(reps));
  std::cout << "wrote sweep.csv sweep.txt to " << dir.string() << "\n";
  return 0;
}

int cmd_sample(Config cfg) {
  apply_preset(cfg);
  if (cfg.taus.empty()) cfg.taus = {1e-4};
  if (cfg.draws < 1) throw usage_error("--draws must be at least 1");
  const Model m = build_model(cfg);
  const auto dir = ensure_out_dir(cfg);

  const LowerFactor L = cholesky(m.q);
  const Factorization f =
      ctigo_factorize(m.stacked, DropRule::threshold(cfg.taus.front()));

  std::optional<DenseVector> mean;
  if (norm2(m.b) > 0.0) {
    CanonicalGmrf g;
    g.b = m.b;
    g.Q = m.q;
    mean = canonical_mean(g);
  }
  const DenseVector* mu = mean ? &*mean : nullptr;

  // Same seed for both routes: with tau = 0 the factors coincide and so do
  // the draws.
  RandomSource rng_l(cfg.seed), rng_r(cfg.seed);
  std::vector<DenseVector> xs_l, xs_r;
  xs_l.reserve(static_cast<std::size_t>(cfg.draws));
  xs_r.reserve(static_cast<std::size_t>(cfg.draws));
  for (long k = 0; k < cfg.draws; ++k) {
    xs_l.push_back(sample_with_factor(L, rng_l, mu));
    xs_r.push_back(sample_with_factor(f.factor, rng_r, mu));
  }

  auto to_csv = [](const std::vector<DenseVector>& xs) {
    std::ostringstream out;
    for (const auto& x : xs) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out << ",";
        out << format_double(x[i]);
      }
      out << "\r\n";
    }
    return out.str();
  };
  write_text(dir / "samples.csv", to_csv(xs_l));
  write_text(dir / "samples_r.csv", to_csv(xs_r));

  if (m.grid_nx > 0) {
    double lo = xs_l.front().front(), hi = lo;
    for (const auto* field : {&xs_l.front(), &xs_r.front()}) {
      for (double v : *field) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    write_pgm(heatmap(xs_l.front(), m.grid_nx, m.grid_ny, lo, hi),
              (dir / "sample_L.pgm").string());
    write_pgm(heatmap(xs_r.front(), m.grid_nx, m.grid_ny, lo, hi),
              (dir / "sample_R.pgm").string());
    std::cout << "wrote sample_L.pgm sample_R.pgm\n";
  }
  std::cout << "wrote " << cfg.draws << " draw(s) per route to "
            << dir.string() << " (generator " << RandomSource::algorithm()
            << ", seed " << cfg.seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse incomplete Cholesky factors for GMRF precision "
               "matrices via incomplete Givens orthogonalization"};
  app.require_subcommand(1);
  // key=value file with one [subcommand] section, e.g. [sweep]; flags given
  // on the command line override the file.
  app.set_config("--config", "", "configuration file");

  Config cfg;
  auto* build = app.add_subcommand("build", "write Q1, Q2 and Q");
  auto* factor =
      app.add_subcommand("factor", "exact and incomplete factors plus patterns");
  auto* sweep = app.add_subcommand("sweep", "tolerance-vs-error table");
  auto* sample = app.add_subcommand("sample", "draw fields from both factors");
  for (auto* cmd : {build, factor, sweep, sample}) {
    register_options(cmd, cfg);
  }

  try {
    app.parse(argc, argv);
    if (build->parsed()) return cmd_build(cfg);
    if (factor->parsed()) return cmd_factor(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (sample->parsed()) return cmd_sample(cfg);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const param_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dim_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return 3;
  }
}
