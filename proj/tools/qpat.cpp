#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpat/calculus.hpp"
#include "qpat/errors.hpp"
#include "qpat/field_io.hpp"
#include "qpat/forward.hpp"
#include "qpat/phantom.hpp"
#include "qpat/recon.hpp"
#include "qpat/stability.hpp"

namespace fs = std::filesystem;
using namespace qpat;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_io("cannot create output directory " + dir + ": " + ec.message());
}

BoundaryData boundary_d_from_options(double constant, const std::string& file) {
  if (file.empty()) return BoundaryData::constant(constant);
  std::ifstream in(file);
  if (!in) throw_io("cannot open boundary diffusion file " + file);
  std::vector<double> angles, values;
  double a = 0, v = 0;
  while (in >> a >> v) {
    angles.push_back(a);
    values.push_back(v);
  }
  if (angles.empty()) throw_io(file + ": no angle/value pairs");
  return BoundaryData::from_samples(std::move(angles), std::move(values));
}

struct PhantomOptions {
  std::string preset = "smooth-A";
  std::string raster;
  std::string out;
  int n = 512;
  double radius = 1.0;
  double smooth_width = 0.04;
  double d_lo = 0.1, d_hi = 0.35;
  double mu_lo = 10.0, mu_hi = 35.0;
  double background_d = 0.2, background_mu = 20.0;
  bool pgm = false;
};

int cmd_phantom(const PhantomOptions& opt) {
  ensure_dir(opt.out);
  auto grid = build_disc_grid(opt.n, opt.radius);
  ScalarField d, mu;
  if (!opt.raster.empty()) {
    d = import_raster(opt.raster, opt.background_d, opt.d_lo, opt.d_hi, grid);
    mu = import_raster(opt.raster, opt.background_mu, opt.mu_lo, opt.mu_hi, grid);
  } else if (opt.preset == "smooth-A") {
    const auto pair = phantom_a(opt.smooth_width);
    d = rasterize(pair.diffusion, grid);
    mu = rasterize(pair.absorption, grid);
  } else if (opt.preset == "discontinuous-A") {
    const auto pair = phantom_a(0.0);
    d = rasterize(pair.diffusion, grid);
    mu = rasterize(pair.absorption, grid);
  } else if (opt.preset == "homogeneous") {
    d = rasterize({opt.background_d, {}, 0.0}, grid);
    mu = rasterize({opt.background_mu, {}, 0.0}, grid);
  } else {
    throw_config("unknown preset " + opt.preset +
                 " (expected smooth-A, discontinuous-A or homogeneous)");
  }
  write_field(d, opt.out + "/D.fld");
  write_field(mu, opt.out + "/mu.fld");
  if (opt.pgm) {
    write_pgm(d, opt.out + "/D.pgm");
    write_pgm(mu, opt.out + "/mu.pgm");
  }
  std::cout << "wrote " << opt.out << "/D.fld and " << opt.out << "/mu.fld (n="
            << opt.n << ")\n";
  return 0;
}

struct ForwardOptions {
  std::string d_path, mu_path, out;
  int meas_n = 256;
  double noise = 0.0;
  unsigned long long seed = 1;
  std::vector<double> peaks;  // radians; defaults to 4/9 pi, 1/2 pi, 5/9 pi
  double std = 0.3;
  double amplitude = 1.0;
  double floor = 0.05;
  bool pgm = false;
};

int cmd_forward(const ForwardOptions& opt) {
  ensure_dir(opt.out);
  const ScalarField d = read_field(opt.d_path);
  const ScalarField mu = read_field(opt.mu_path);
  if (!mu.grid_ptr()->same_geometry(d.grid()))
    throw_config("diffusion and absorption files use different grids");
  const int fine_n = d.grid().n();
  if (fine_n < 2 * opt.meas_n)
    throw_config("inverse-crime guard: coefficient grid n=" + std::to_string(fine_n) +
                 " must be at least twice --meas-n");

  std::vector<IlluminationSpec> specs;
  if (opt.peaks.empty()) {
    specs = default_illuminations();
    for (auto& s : specs) {
      s.std = opt.std;
      s.amplitude = opt.amplitude;
      s.floor = opt.floor;
    }
  } else {
    for (double p : opt.peaks) specs.push_back({p, opt.std, opt.amplitude, opt.floor});
  }

  const DataSet data = simulate(d, mu, specs, fine_n, opt.meas_n, opt.noise, opt.seed);

  ForwardManifest m;
  m.fine_n = fine_n;
  m.meas_n = opt.meas_n;
  m.radius = d.grid().radius();
  m.noise_level = opt.noise;
  m.seed = opt.seed;
  m.illuminations = specs;
  for (std::size_t j = 0; j < data.H.size(); ++j) {
    const std::string name = "H" + std::to_string(j + 1) + ".fld";
    write_field(data.H[j], opt.out + "/" + name);
    if (opt.pgm) write_pgm(data.H[j], opt.out + "/H" + std::to_string(j + 1) + ".pgm");
    m.field_files.push_back(name);
  }
  write_manifest(m, opt.out + "/manifest.json");
  std::cout << "wrote " << data.H.size() << " internal data fields to " << opt.out
            << "\n";
  return 0;
}

struct ReconOptions {
  std::string data_dir, out;
  double boundary_d = 0.2;
  std::string boundary_d_file;
  double h1_threshold = 0.0;  // auto
  double cond_threshold = 50.0;
  double smooth_data = 0.02;
  double smooth_grad = 0.02;
  int path_starts = 10;
  std::string completion = "average";
  double background_d = 0.2;
  double background_mu = 20.0;
  bool pgm = false;
};

int cmd_recon(const ReconOptions& opt) {
  ensure_dir(opt.out);
  const ForwardManifest m = read_manifest(opt.data_dir + "/manifest.json");
  DataSet data;
  data.noise_level = m.noise_level;
  data.illuminations = m.illuminations;
  for (const auto& name : m.field_files)
    data.H.push_back(read_field(opt.data_dir + "/" + name));
  if (data.H.empty()) throw_io("manifest lists no data fields");
  data.grid = data.H[0].grid_ptr();

  ReconConfig cfg;
  cfg.h1_threshold = opt.h1_threshold;
  cfg.cond_threshold = opt.cond_threshold;
  cfg.smooth_width_data = opt.smooth_data;
  cfg.smooth_width_grad = opt.smooth_grad;
  cfg.n_path_starts = opt.path_starts;
  if (opt.completion == "average") {
    cfg.completion = CompletionKind::Average;
  } else if (opt.completion == "background") {
    cfg.completion = CompletionKind::Background;
  } else {
    throw_config("--completion must be average or background");
  }
  cfg.background_diffusion = opt.background_d;
  cfg.background_absorption = opt.background_mu;
  cfg.boundary_diffusion = boundary_d_from_options(opt.boundary_d, opt.boundary_d_file);

  const ReconResult res = run_pipeline(data, cfg);

  write_field(res.diffusion, opt.out + "/D_rec.fld");
  write_field(res.absorption, opt.out + "/mu_rec.fld");
  write_field(res.sigma, opt.out + "/sigma.fld");
  write_field(res.helmholtz_q, opt.out + "/q.fld");
  write_field(mask_to_field(res.reliable_mask, res.grid), opt.out + "/mask.fld");
  if (opt.pgm) {
    write_pgm(res.diffusion, opt.out + "/D_rec.pgm");
    write_pgm(res.absorption, opt.out + "/mu_rec.pgm");
  }

  std::ostringstream diag;
  for (const auto& [key, value] : res.diagnostics.scalars)
    diag << key << "=" << value << "\n";
  const auto& rep = res.diagnostics.sqrt_diffusion_report;
  diag << "sqrtd_solver_method=" << rep.method << "\n";
  diag << "sqrtd_solver_iterations=" << rep.iterations << "\n";
  diag << "sqrtd_solver_residual=" << rep.residual_norm << "\n";
  diag << "stages=";
  for (std::size_t i = 0; i < res.diagnostics.stages.size(); ++i)
    diag << (i ? "," : "") << res.diagnostics.stages[i];
  diag << "\n";
  std::ofstream dout(opt.out + "/diagnostics.txt");
  dout << diag.str();
  std::cout << diag.str();
  return 0;
}

struct ErrorOptions {
  std::string recon, truth, mask;
  std::string name = "field";
  double region_y = 0.2;
  bool region_all = false;
};

int cmd_error(const ErrorOptions& opt) {
  const ScalarField recon = read_field(opt.recon);
  ScalarField truth = read_field(opt.truth);
  if (!truth.grid_ptr()->same_geometry(recon.grid())) {
    if (truth.grid().h() < recon.grid().h())
      truth = restrict_to(truth, recon.grid_ptr());  // fine truth vs coarse recon
    else
      throw_config("recon and truth grids are incompatible");
  }
  ScalarField masked = recon;
  if (!opt.mask.empty()) {
    const Mask mask = field_to_mask(read_field(opt.mask));
    for (int idx = 0; idx < masked.size(); ++idx)
      if (!mask[idx]) masked[idx] = kSentinel;
  }
  const double y0 = opt.region_y;
  const bool all = opt.region_all;
  const double err = relative_error(
      masked, truth, [y0, all](double, double y) { return all || y > y0; });
  std::printf("err_%s=%.6f\n", opt.name.c_str(), err);
  return 0;
}

struct StabilityOptions {
  double rho = 1.0;
  double theta = 0.5;
  double lambda0 = 1.5;
  double r0 = 0.0;  // 0: use 2 * r_bound
  int samples = 1000;
  std::string out;
};

int cmd_stability(const StabilityOptions& opt) {
  StabilityParams p;
  p.rho = opt.rho;
  p.theta = opt.theta;
  p.lambda0 = opt.lambda0;
  const double bound = r_bound(p);
  p.r0 = opt.r0 > 0 ? opt.r0 : 2.0 * bound;

  std::ostringstream csv;
  csv << "r,gamma,alpha,beta,r_bound\n";
  for (int i = 1; i <= opt.samples; ++i) {
    p.r = bound * i / (opt.samples + 1);
    const auto [alpha, beta] = alpha_beta(p);
    csv.precision(12);
    csv << p.r << "," << gamma_exponent(p) << "," << alpha << "," << beta << ","
        << bound << "\n";
  }
  const MonotoneReport rep = check_monotone_decreasing(p, opt.samples);

  if (!opt.out.empty()) {
    std::ofstream f(opt.out);
    if (!f) throw_io("cannot open " + opt.out);
    f << csv.str();
  } else {
    std::cout << csv.str();
  }
  std::printf("monotone=%s max_forward_diff=%.3e samples=%d r_max=%.12g\n",
              rep.pass ? "PASS" : "FAIL", rep.max_forward_diff, rep.samples,
              rep.r_max);
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpat2d: local reconstruction of diffusion and absorption from "
               "photoacoustic internal data"};
  app.require_subcommand(1);

  PhantomOptions ph;
  auto* phantom = app.add_subcommand("phantom", "generate coefficient fields");
  phantom->add_option("--preset", ph.preset,
                      "smooth-A, discontinuous-A or homogeneous");
  phantom->add_option("--raster", ph.raster, "P5 graymap to import instead");
  phantom->add_option("--n", ph.n, "nodes per axis")->check(CLI::PositiveNumber);
  phantom->add_option("--radius", ph.radius, "disc radius");
  phantom->add_option("--smooth-width", ph.smooth_width, "smooth-A blur width");
  phantom->add_option("--d-min", ph.d_lo, "raster: diffusion at gray 0");
  phantom->add_option("--d-max", ph.d_hi, "raster: diffusion at gray max");
  phantom->add_option("--mu-min", ph.mu_lo, "raster: absorption at gray 0");
  phantom->add_option("--mu-max", ph.mu_hi, "raster: absorption at gray max");
  phantom->add_option("--background-d", ph.background_d, "background diffusion");
  phantom->add_option("--background-mu", ph.background_mu, "background absorption");
  phantom->add_flag("--pgm", ph.pgm, "also write graymap previews");
  phantom->add_option("--out", ph.out, "output directory")->required();
  phantom->set_config("--config");
  phantom->allow_config_extras(false);

  ForwardOptions fw;
  auto* forward = app.add_subcommand("forward", "simulate internal data");
  forward->add_option("--d", fw.d_path, "diffusion field file")->required();
  forward->add_option("--mu", fw.mu_path, "absorption field file")->required();
  forward->add_option("--meas-n", fw.meas_n, "measurement grid nodes per axis");
  forward->add_option("--noise", fw.noise, "relative multiplicative noise std");
  forward->add_option("--seed", fw.seed, "noise seed");
  forward->add_option("--peak", fw.peaks, "illumination peak angle (repeatable)");
  forward->add_option("--std", fw.std, "illumination angular std");
  forward->add_option("--amplitude", fw.amplitude, "illumination amplitude");
  forward->add_option("--floor", fw.floor, "illumination floor");
  forward->add_flag("--pgm", fw.pgm, "also write graymap previews");
  forward->add_option("--out", fw.out, "output directory")->required();
  forward->set_config("--config");
  forward->allow_config_extras(false);

  ReconOptions rc;
  auto* recon = app.add_subcommand("recon", "run the inversion pipeline");
  recon->add_option("--data", rc.data_dir, "directory with manifest.json")->required();
  recon->add_option("--boundary-d", rc.boundary_d, "constant boundary diffusion");
  recon->add_option("--boundary-d-file", rc.boundary_d_file,
                    "angle/value pairs for boundary diffusion");
  recon->add_option("--h1-threshold", rc.h1_threshold,
                    "absolute H1 floor (0 = noise-based default)");
  recon->add_option("--cond-threshold", rc.cond_threshold, "max condition number");
  recon->add_option("--smooth-data", rc.smooth_data, "data smoothing width");
  recon->add_option("--smooth-grad", rc.smooth_grad, "derivative smoothing width");
  recon->add_option("--path-starts", rc.path_starts, "boundary start count");
  recon->add_option("--completion", rc.completion, "average or background");
  recon->add_option("--background-d", rc.background_d, "background diffusion");
  recon->add_option("--background-mu", rc.background_mu, "background absorption");
  recon->add_flag("--pgm", rc.pgm, "also write graymap previews");
  recon->add_option("--out", rc.out, "output directory")->required();
  recon->set_config("--config");
  recon->allow_config_extras(false);

  ErrorOptions er;
  auto* error_cmd = app.add_subcommand("error", "relative l2 error report");
  error_cmd->add_option("--recon", er.recon, "reconstructed field")->required();
  error_cmd->add_option("--truth", er.truth, "ground-truth field")->required();
  error_cmd->add_option("--mask", er.mask, "restrict to a mask field");
  error_cmd->add_option("--name", er.name, "label in the err_<name>= line");
  error_cmd->add_option("--region-y", er.region_y, "use region y > value");
  error_cmd->add_flag("--region-all", er.region_all, "use the whole disc");
  error_cmd->set_config("--config");
  error_cmd->allow_config_extras(false);

  StabilityOptions st;
  auto* stability = app.add_subcommand("stability", "Holder exponent tables");
  stability->add_option("--rho", st.rho, "exterior sphere radius");
  stability->add_option("--theta", st.theta, "shape constant in (0,1)");
  stability->add_option("--lambda0", st.lambda0, "weight exponent > 1");
  stability->add_option("--r0", st.r0, "outer radius (0 = 2*r_bound)");
  stability->add_option("--samples", st.samples, "sweep sample count");
  stability->add_option("--out", st.out, "CSV output path (default stdout)");
  stability->set_config("--config");
  stability->allow_config_extras(false);

  try {
    app.parse(argc, argv);
    if (phantom->parsed()) return cmd_phantom(ph);
    if (forward->parsed()) return cmd_forward(fw);
    if (recon->parsed()) return cmd_recon(rc);
    if (error_cmd->parsed()) return cmd_error(er);
    if (stability->parsed()) return cmd_stability(st);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const NotConvergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
