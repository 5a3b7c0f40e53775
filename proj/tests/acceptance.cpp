// Acceptance run: one PASS/FAIL line per criterion. The first argument is the
// directory that receives every generated file.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fibreflow/commands.hpp"
#include "fibreflow/config.hpp"
#include "fibreflow/diagnostics.hpp"
#include "fibreflow/errors.hpp"
#include "fibreflow/io.hpp"
#include "fibreflow/pde.hpp"
#include "fibreflow/travelling.hpp"

using namespace fibreflow;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = FIBREFLOW_CONFIG_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o) {
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << title << ": " << o.detail
            << std::endl;
}

// Runs `body` and turns an escaped exception into a failed outcome.
Outcome guarded(const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("exception: ") + e.what();
  }
  return o;
}

std::string num(double x, int digits = 6) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << x;
  return ss.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double mass_drift(const std::vector<DiagnosticsSample>& samples) {
  double drift = 0.0;
  for (const DiagnosticsSample& s : samples)
    drift = std::max(drift, std::abs(s.mass - samples.front().mass) / samples.front().mass);
  return drift;
}

TravellingWave wave_from(const ProfileFile& prof) {
  const Grid g(parse_number(prof.header.at("L")), prof.xi.size());
  TravellingWave w{PeriodicField(g), PeriodicField(g), parse_number(prof.header.at("s")),
                   parse_number(prof.header.at("M")), parse_number(prof.header.at("q0")), 0, 0.0};
  for (std::size_t i = 0; i < prof.xi.size(); ++i) {
    w.H[i] = prof.H[i];
    w.U[i] = prof.U[i];
  }
  return w;
}

PeriodicField centred(const PeriodicField& h) {
  const auto peak = locate_peak(h);
  if (!peak) throw Error("profile has no peak");
  return shift_by(h, 0.5 * h.grid().length() - peak->x);
}

// Late-time transient used as the travelling-wave guess.
FieldState transient(const TwConfig& cfg, std::size_t nodes) {
  const Grid g(cfg.length, nodes);
  FieldState s = initial_condition(g, cfg.ic.h0, cfg.ic.amplitude, cfg.params);
  StepperConfig st;
  st.dt = cfg.guess.dt;
  const int steps = static_cast<int>(std::lround(cfg.guess.t_end / st.dt));
  for (int k = 0; k < steps; ++k) s = step(s, st, cfg.params);
  return s;
}

TravellingWave solve_at(const TwConfig& cfg, const FieldState& guess, std::size_t nodes) {
  TwSolveConfig solver = cfg.solver;
  solver.initial_guess = FromTrajectory{guess, std::nullopt};
  return solve_tw(solver, cfg.resolved_mass(), cfg.params, Grid(cfg.length, nodes));
}

double worst_relative(const DenseMatrix& analytic, const std::vector<std::vector<double>>& fd) {
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i)
    for (std::size_t j = 0; j < fd[i].size(); ++j) {
      const double ref = fd[i][j];
      const double err = std::abs(analytic(i, j) - ref);
      worst = std::max(worst, std::abs(ref) >= 1e-8 ? err / std::abs(ref) : err);
    }
  return worst;
}

// Fourth-order central differences of `residual` with respect to each unknown.
std::vector<std::vector<double>> fd_jacobian(
    std::vector<double> x, const std::function<std::vector<double>(const std::vector<double>&)>& residual) {
  const double h = 1e-4;
  const std::size_t m = residual(x).size();
  std::vector<std::vector<double>> out(m, std::vector<double>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    std::vector<std::vector<double>> r;
    const double x0 = x[j];
    for (double k : {-2.0, -1.0, 1.0, 2.0}) {
      x[j] = x0 + k * h;
      r.push_back(residual(x));
    }
    x[j] = x0;
    for (std::size_t i = 0; i < m; ++i)
      out[i][j] = (r[0][i] - 8.0 * r[1][i] + 8.0 * r[2][i] - r[3][i]) / (12.0 * h);
  }
  return out;
}

FieldState random_state(const Grid& g, const ModelParams& p, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-0.3, 0.3);
  FieldState s{0.0, PeriodicField(g), PeriodicField(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.h[i] = 2.0 + dist(rng);
    s.u[i] = mobility_g(s.h[i], p) * (1.0 + dist(rng));
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out);
  std::ostringstream log;
  const char cases[] = {'a', 'b', 'c', 'd'};

  // 1. Travelling-wave speeds through the tw command.
  std::map<char, TravellingWave> waves;
  std::map<char, TwConfig> tw_configs;
  {
    const double target[] = {1.396, 2.517, 1.482, 0.1};
    const double tol[] = {0.01, 0.015, 0.015, 0.01};
    report(1, "travelling-wave speeds at N = 400", guarded([&](Outcome& o) {
      for (int k = 0; k < 4; ++k) {
        const char c = cases[k];
        const fs::path cfg_path = kConfigs / (std::string("tw_case_") + c + ".json");
        const fs::path profile = out / (std::string("tw_case_") + c + ".csv");
        tw_configs[c] = load_tw_config(cfg_path);
        const auto start = std::chrono::steady_clock::now();
        const int code = cmd_tw({cfg_path, std::nullopt, false, profile}, log);
        const double elapsed = seconds_since(start);
        if (code != kExitOk) {
          o.require(false, std::string("case ") + c + " exit " + std::to_string(code));
          continue;
        }
        const TravellingWave w = wave_from(read_profile(profile));
        waves.emplace(c, w);
        o.require(std::abs(w.s - target[k]) <= tol[k],
                  std::string(1, c) + ": s=" + num(w.s, 7) + " (" + num(elapsed, 3) + " s)");
      }
    }));
  }

  // Full transient runs of cases (a) and (d).
  std::map<char, std::vector<DiagnosticsSample>> diagnostics;
  std::map<char, int> run_codes;
  for (const char c : {'a', 'd'}) {
    const auto start = std::chrono::steady_clock::now();
    run_codes[c] = cmd_pde({kConfigs / (std::string("case_") + c + ".json"), out / (std::string("case_") + c)}, log);
    std::cout << "      case (" << c << ") transient: exit " << run_codes[c] << " after "
              << num(seconds_since(start), 4) << " s" << std::endl;
    if (run_codes[c] == kExitOk)
      diagnostics[c] = read_diagnostics(out / (std::string("case_") + c) / "diagnostics.csv");
  }
  const ModelParams params_a = load_run_config(kConfigs / "case_a.json").params;
  const ModelParams params_d = load_run_config(kConfigs / "case_d.json").params;

  // 2. Transient approaches the travelling wave.
  report(2, "case (a) transient approaches the travelling wave", guarded([&](Outcome& o) {
    if (run_codes['a'] != kExitOk || !waves.contains('a')) throw Error("missing case (a) run or wave");
    const std::vector<FieldState> traj = read_trajectory(out / "case_a" / "trajectory.csv", 20.0);
    const FieldState& last = traj.back();
    const TravellingWave& w = waves.at('a');
    if (w.grid().size() != last.grid().size()) throw Error("grid mismatch");
    const PeriodicField a = centred(last.h), b = centred(w.H);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    o.require(diff <= 1e-2, "aligned |h - H|_inf at t=" + num(last.t) + " is " + num(diff, 3));
    const WaveTrack track = track_wave(traj);
    if (!track.speed) throw Error(track.message);
    o.require(std::abs(*track.speed - 1.396) <= 0.01 * 1.396, "tracked speed " + num(*track.speed, 7));
  }));

  // 3. Energy bound with a strictly positive margin after t = 0.
  report(3, "energy bound E + I <= C0", guarded([&](Outcome& o) {
    for (const char c : {'a', 'd'}) {
      if (!diagnostics.contains(c)) throw Error(std::string("missing case ") + c);
      const std::vector<DiagnosticsSample>& s = diagnostics[c];
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < s.size(); ++k)
        worst = std::min(worst, s[k].c0_bound - (s[k].energy + s[k].cum_dissipation));
      const double at_zero = s[0].c0_bound - s[0].energy;
      o.require(worst > 0.0 && at_zero >= 0.0 && s.size() > 1,
                std::string(1, c) + ": " + std::to_string(s.size()) + " samples, min margin (t>0) " +
                    num(worst, 4) + ", t=0 margin " + num(at_zero, 3));
    }
  }));

  // 4. Entropy bound for several interpolation parameters.
  report(4, "entropy bound on case (a)", guarded([&](Outcome& o) {
    if (!diagnostics.contains('a')) throw Error("missing case (a) run");
    for (double eps : {0.5, 0.25, 0.75}) {
      const CertificationReport r = certify(diagnostics['a'], params_a, eps);
      const double margin = r.min_entropy_margin.value_or(-1.0);
      o.require(r.min_entropy_margin && margin > 0.0, "eps=" + num(eps) + " min margin " + num(margin, 4));
    }
  }));

  // 5. Mass conservation.
  report(5, "mass conservation", guarded([&](Outcome& o) {
    for (const char c : {'a', 'd'}) {
      if (!diagnostics.contains(c)) throw Error(std::string("missing case ") + c);
      const double drift = mass_drift(diagnostics[c]);
      o.require(drift <= 1e-8, std::string(1, c) + ": relative drift " + num(drift, 3));
    }
  }));

  // 6. Uniform state is a fixed point.
  report(6, "uniform fixed point over 100 steps", guarded([&](Outcome& o) {
    for (const ModelParams& p : {params_a, params_d}) {
      const Grid g(20.0, 400);
      const double h0 = 2.29;
      const FieldState start{0.0, PeriodicField(g, h0), PeriodicField(g, mobility_g(h0, p))};
      FieldState s = start;
      StepperConfig cfg;
      for (int k = 0; k < 100; ++k) s = step(s, cfg, p);
      double dev = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        dev = std::max({dev, std::abs(s.h[i] - h0), std::abs(s.u[i] - start.u[i])});
      o.require(dev <= 1e-9, std::string(p.profile == FlowProfile::Plug ? "plug" : "laminar") +
                                 " deviation " + num(dev, 3));
    }
  }));

  // 7. Flux first integral on every converged wave.
  report(7, "flux first integral", guarded([&](Outcome& o) {
    for (const char c : cases) {
      if (!waves.contains(c)) throw Error(std::string("missing wave ") + c);
      const FluxConstant f = flux_constant(waves.at(c), tw_configs[c].params);
      o.require(f.spread <= 1e-6, std::string(1, c) + ": spread " + num(f.spread, 3));
    }
  }));

  // 8 and 9 share converged waves at N = 200, 400, 800.
  std::map<std::pair<char, std::size_t>, TravellingWave> refined;
  for (const char c : {'a', 'b'}) {
    try {
      const FieldState guess = transient(tw_configs.at(c), 200);
      for (std::size_t n : {200, 400, 800}) {
        if (c == 'b' && n != 800) continue;
        refined.emplace(std::make_pair(c, n), solve_at(tw_configs.at(c), guess, n));
      }
    } catch (const std::exception& e) {
      std::cout << "      refinement of case (" << c << ") failed: " << e.what() << std::endl;
    }
  }

  report(8, "first-integral identity converges at second order", guarded([&](Outcome& o) {
    std::vector<double> v;
    for (std::size_t n : {200, 400, 800}) {
      const auto it = refined.find({'a', n});
      if (it == refined.end()) throw Error("missing wave at N = " + std::to_string(n));
      v.push_back(first_integral_check(it->second, tw_configs['a'].params));
    }
    o.require(true, "violations " + num(v[0], 3) + ", " + num(v[1], 3) + ", " + num(v[2], 3));
    o.require(std::abs(v[0] / v[1] - 4.0) <= 1.0, "ratio " + num(v[0] / v[1], 4));
    o.require(std::abs(v[1] / v[2] - 4.0) <= 1.0, "ratio " + num(v[1] / v[2], 4));
  }));

  report(9, "closed-form speed at N = 800", guarded([&](Outcome& o) {
    for (const char c : {'a', 'b'}) {
      const auto it = refined.find({c, 800});
      if (it == refined.end()) throw Error(std::string("missing wave ") + c);
      const TravellingWave& w = it->second;
      const double a = tw_configs[c].params.a;
      const ClosedFormSpeed cf = closed_form_speed(w, tw_configs[c].params);
      const double rel = std::abs(cf.u_c - w.s / a) / (w.s / a);
      o.require(rel <= 1e-3, std::string(1, c) + ": relative " + num(rel, 3));
    }
  }));

  // 10. Analytic Jacobians against finite differences.
  report(10, "Jacobians match finite differences at N = 16", guarded([&](Outcome& o) {
    const Grid g(20.0, 16);
    for (const ModelParams& p : {params_a, params_d}) {
      const std::string name = p.profile == FlowProfile::Plug ? "plug" : "laminar";
      const FieldState prev = random_state(g, p, 11), next = random_state(g, p, 12);
      const double dt = 0.01;
      const auto pde_fd = fd_jacobian(pack(next), [&](const std::vector<double>& x) {
        return residual(unpack(g, 0.0, x), prev, dt, p);
      });
      const double pde_err = worst_relative(residual_jacobian(next, dt, p).to_dense(), pde_fd);
      o.require(pde_err <= 1e-6, name + " pde " + num(pde_err, 3));

      const std::size_t n = g.size();
      std::vector<double> x(2 * n + 1);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = next.h[i];
        x[n + i] = next.u[i];
      }
      x[2 * n] = 1.1;
      const auto unpack_tw = [&](const std::vector<double>& y, PeriodicField& H, PeriodicField& U) {
        for (std::size_t i = 0; i < n; ++i) {
          H[i] = y[i];
          U[i] = y[n + i];
        }
      };
      const auto tw_fd = fd_jacobian(x, [&](const std::vector<double>& y) {
        PeriodicField H(g), U(g);
        unpack_tw(y, H, U);
        return tw_residual(H, U, y[2 * n], 60.0, 3, 2.0, p);
      });
      PeriodicField H(g), U(g);
      unpack_tw(x, H, U);
      const double tw_err = worst_relative(tw_jacobian(H, U, x[2 * n], 3, p), tw_fd);
      o.require(tw_err <= 1e-6, name + " tw " + num(tw_err, 3));
    }
  }));

  // 11. Difference operators converge at second order.
  report(11, "d1 and d2 refinement ratios", guarded([&](Outcome& o) {
    const double L = 20.0, k = 2.0 * std::numbers::pi / L;
    const auto f = [&](double x) { return std::exp(std::sin(k * x)); };
    const auto f1 = [&](double x) { return k * std::cos(k * x) * f(x); };
    const auto f2 = [&](double x) {
      const double c = std::cos(k * x), s = std::sin(k * x);
      return k * k * (c * c - s) * f(x);
    };
    std::vector<double> e1, e2;
    for (std::size_t n : {32, 64, 128, 256}) {
      const Grid g(L, n);
      const PeriodicField u = PeriodicField::sample(g, f);
      const PeriodicField a = d1(u), b = d2(u);
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        m1 = std::max(m1, std::abs(a[i] - f1(g.x(i))));
        m2 = std::max(m2, std::abs(b[i] - f2(g.x(i))));
      }
      e1.push_back(m1);
      e2.push_back(m2);
    }
    for (std::size_t j = 1; j < e1.size(); ++j) {
      const double r1 = e1[j - 1] / e1[j], r2 = e2[j - 1] / e2[j];
      o.require(std::abs(r1 - 4.0) <= 0.3 && std::abs(r2 - 4.0) <= 0.3,
                "d1 " + num(r1, 4) + " d2 " + num(r2, 4));
    }
  }));

  // 12. Determinism and the round-trip check.
  report(12, "determinism and stored-output check", guarded([&](Outcome& o) {
    const fs::path short_cfg = out / "short.json";
    RunConfig cfg = load_run_config(kConfigs / "case_a.json");
    cfg.t_end = 2.0;
    cfg.stepper.dt = 0.01;
    cfg.output.every = 0.5;
    std::ofstream(short_cfg) << dump(cfg);
    const int r1 = cmd_pde({short_cfg, out / "short_1"}, log);
    const int r2 = cmd_pde({short_cfg, out / "short_2"}, log);
    o.require(r1 == kExitOk && r2 == kExitOk, "short runs exit " + std::to_string(r1) + "/" + std::to_string(r2));
    for (const char* file : {"trajectory.csv", "diagnostics.csv"}) {
      const std::string a = slurp(out / "short_1" / file), b = slurp(out / "short_2" / file);
      o.require(!a.empty() && a == b, std::string(file) + " byte-identical");
    }
    for (const char c : {'a', 'd'}) {
      const int code = cmd_check(out / (std::string("case_") + c), log);
      o.require(code == kExitOk, std::string("check case_") + c + " exit " + std::to_string(code));
    }
  }));

  std::ofstream(out / "acceptance.log") << log.str();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
