// Acceptance suite: one [PASS]/[FAIL] line per criterion.
// argv[1] must be the path to the command-line tool.

#include "shapeinv/align.hpp"
#include "shapeinv/contraction.hpp"
#include "shapeinv/errors.hpp"
#include "shapeinv/hermite.hpp"
#include "shapeinv/invariants.hpp"
#include "shapeinv/shape.hpp"
#include "shapeinv/symtensor.hpp"

#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace shapeinv;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, double seconds, const std::string& detail = {}) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << seconds << " s)";
  if (!ok && !detail.empty()) std::cout << " -- " << detail;
  std::cout << "\n";
  if (!ok) ++failures;
}

template <typename Fn>
void criterion(const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(name, ok, seconds, detail);
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// ---- criterion 1: rotation invariance on random shapes ---------------------

bool rotation_invariance(std::string& detail) {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> count(5, 50);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = (rep % 2 == 0) ? 2 : 3;
    const InvariantCatalog catalog = default_catalog(d, 4);
    const Shape base = testutil::random_shape(d, count(rng), rng);
    const auto [p, pd] = scale_normalize(center(base));
    const Eigen::MatrixXd o = testutil::random_orthogonal(d, rng, rep % 3 == 0);
    const auto [q, qd] = scale_normalize(center(testutil::transform_points(base, o)));
    const auto before = raw_invariants(compute_moments(p, 4).tensors, catalog);
    const auto after = raw_invariants(compute_moments(q, 4).tensors, catalog);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (!close_rel(before[i], after[i], 1e-8)) {
        detail = catalog.entries[i].name + ": " + std::to_string(before[i]) + " vs " +
                 std::to_string(after[i]);
        return false;
      }
    }
  }
  return true;
}

// ---- criterion 2: packed evaluation vs an independent dense oracle ---------

double dense_gram_trace_oracle(const SymTensor& t, int power) {
  const int d = t.dim();
  const auto dense = t.to_dense();
  if (t.order() == 2) {
    Eigen::MatrixXd m(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) m(a, b) = dense[static_cast<std::size_t>(a + d * b)];
    }
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < power; ++i) acc = acc * m;
    return acc.trace();
  }
  if (t.order() == 3) {
    // M_ab = sum_{c,e} t_ace t_bce
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int c = 0; c < d; ++c) {
          for (int e = 0; e < d; ++e) {
            m(a, b) += dense[static_cast<std::size_t>(a + d * (c + d * e))] *
                       dense[static_cast<std::size_t>(b + d * (c + d * e))];
          }
        }
      }
    }
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < power; ++i) acc = acc * m;
    return acc.trace();
  }
  // order 4: C_{(ab),(cd)} = sum_{e,f} t_abef t_cdef over pair indices
  const int dd = d * d;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dd, dd);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int c = 0; c < d; ++c) {
        for (int g = 0; g < d; ++g) {
          double acc = 0.0;
          for (int e = 0; e < d; ++e) {
            for (int f = 0; f < d; ++f) {
              acc += dense[static_cast<std::size_t>(a + d * (b + d * (e + d * f)))] *
                     dense[static_cast<std::size_t>(c + d * (g + d * (e + d * f)))];
            }
          }
          m(a + d * b, c + d * g) = acc;
        }
      }
    }
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(dd, dd);
  for (int i = 0; i < power; ++i) acc = acc * m;
  return acc.trace();
}

bool oracle_equivalence(std::string& detail) {
  std::mt19937_64 rng(2002);
  for (int d : {2, 3}) {
    const InvariantCatalog catalog = default_catalog(d, 4);
    for (const CatalogEntry& entry : catalog.entries) {
      for (int rep = 0; rep < 20; ++rep) {
        TensorSet tensors;
        for (int r = 0; r <= 4; ++r) {
          tensors.emplace(r, testutil::random_symtensor(d, r, rng));
        }
        std::vector<SymTensor> bound;
        for (int order : entry.binding) bound.push_back(tensors.at(order));
        const double packed = evaluate_graph(entry.graph, bound);
        double oracle = 0.0;
        const double tuples =
            std::pow(static_cast<double>(d), static_cast<double>(entry.graph.edges.size()));
        if (tuples <= 1.0e6) {
          oracle = testutil::brute_force_graph(entry.graph, bound);
        } else {
          // large trace-power graphs: independent dense matrix-power route
          const std::size_t pos = entry.name.rfind('_');
          const int power = std::stoi(entry.name.substr(pos + 1));
          oracle = dense_gram_trace_oracle(bound.front(), power);
        }
        if (!close_rel(packed, oracle, 1e-10)) {
          detail = "d=" + std::to_string(d) + " " + entry.name + ": " + std::to_string(packed) +
                   " vs " + std::to_string(oracle);
          return false;
        }
      }
    }
  }
  return true;
}

// ---- criterion 3: trace powers vs eigendecomposition -----------------------

bool trace_identity(std::string& detail) {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> dims(2, 6);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = dims(rng);
    const SymTensor m = testutil::random_symtensor(d, 2, rng);
    Eigen::MatrixXd dense(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) dense(a, b) = m.at({a, b});
    }
    const Eigen::VectorXd eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues();
    for (int i = 1; i <= d; ++i) {
      double lambda_sum = 0.0;
      for (int k = 0; k < d; ++k) lambda_sum += std::pow(eig(k), i);
      if (!close_rel(trace_power(m, i), lambda_sum, 1e-9)) {
        detail = "d=" + std::to_string(d) + " i=" + std::to_string(i);
        return false;
      }
    }
  }
  return true;
}

// ---- criterion 4: quadrature orthonormality --------------------------------

bool hermite_orthonormality(std::string& detail) {
  const double h = 1e-3;
  const double lo = -12.0;
  const int n = static_cast<int>(std::lround(24.0 / h));
  const int jmax = 20;
  std::vector<double> values(static_cast<std::size_t>(jmax) + 1);
  std::vector<std::vector<double>> gram(
      static_cast<std::size_t>(jmax) + 1,
      std::vector<double>(static_cast<std::size_t>(jmax) + 1, 0.0));
  for (int k = 0; k <= n; ++k) {
    hermite_fn_all(jmax, lo + h * k, values);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    for (int i = 0; i <= jmax; ++i) {
      for (int j = i; j <= jmax; ++j) {
        gram[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            w * values[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(j)];
      }
    }
  }
  for (int i = 0; i <= jmax; ++i) {
    for (int j = i; j <= jmax; ++j) {
      const double integral = gram[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * h;
      const double expected = (i == j) ? 1.0 : 0.0;
      if (std::abs(integral - expected) > 1e-8) {
        detail = "(" + std::to_string(i) + "," + std::to_string(j) + ") -> " +
                 std::to_string(integral);
        return false;
      }
    }
  }
  return true;
}

// ---- criterion 5: reconstruction accuracy grows with the degree cap --------

Shape synthetic_blob() {
  const int n = 28;
  GridInfo grid{{0.0, 0.0}, {1.0, 1.0}, {n, n}};
  std::vector<double> coords, weights;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto x = grid.cell_center(c);
    const double dx1 = (x[0] - 10.0) / 3.5, dy1 = (x[1] - 16.0) / 3.0;
    const double dx2 = (x[0] - 18.0) / 2.8, dy2 = (x[1] - 10.0) / 3.2;
    coords.insert(coords.end(), x.begin(), x.end());
    weights.push_back(std::exp(-0.5 * (dx1 * dx1 + dy1 * dy1)) +
                      0.7 * std::exp(-0.5 * (dx2 * dx2 + dy2 * dy2)));
  }
  Shape s = make_shape(2, std::move(coords), std::move(weights));
  s.grid = grid;
  return s;
}

void write_pgm(const fs::path& path, const std::vector<double>& field, int width, int height) {
  double peak = 0.0;
  for (double v : field) peak = std::max(peak, v);
  if (peak <= 0.0) peak = 1.0;
  std::ofstream out(path);
  out << "P2\n" << width << " " << height << "\n255\n";
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      // image row 0 is the top: flip the vertical axis back
      const std::size_t c =
          static_cast<std::size_t>(col) + static_cast<std::size_t>(width) *
                                              static_cast<std::size_t>(height - 1 - row);
      const int gray =
          static_cast<int>(std::lround(255.0 * std::clamp(field[c] / peak, 0.0, 1.0)));
      out << gray << (col + 1 == width ? "\n" : " ");
    }
  }
}

bool reconstruction_monotonicity(std::string& detail) {
  const Shape blob = synthetic_blob();
  const auto [normalized, divisor] = scale_normalize(center(blob));
  const int m = 20;
  const fs::path out_dir = fs::current_path() / "acceptance_out";
  fs::create_directories(out_dir);
  double previous = -1.0;
  for (int cap = 0; cap <= m; ++cap) {
    // lattice-orthogonalized coefficients = least squares on the grid, so the
    // error over nested degree caps is non-increasing by construction
    const HermiteCoeffs coeffs =
        encode_shape(blob, cap, ScaleMode::normalize, 1.0, /*lattice_orthogonalize=*/true);
    const double err = reconstruction_l2_error(normalized, coeffs, -1);
    if (previous >= 0.0 && err > previous + 1e-6) {
      detail = "m=" + std::to_string(cap) + ": " + std::to_string(err) + " > " +
               std::to_string(previous);
      return false;
    }
    previous = err;
    if (cap == 0 || cap == 5 || cap == m) {
      const auto field = reconstruct(coeffs, *normalized.grid);
      write_pgm(out_dir / ("blob_m" + std::to_string(cap) + ".pgm"), field,
                normalized.grid->extents[0], normalized.grid->extents[1]);
    }
  }
  return true;
}

// ---- criterion 6: translation / scale invariance of features ---------------

bool translation_scale_invariance(std::string& detail) {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
  for (int rep = 0; rep < 50; ++rep) {
    const int d = (rep % 2 == 0) ? 2 : 3;
    const InvariantCatalog catalog = default_catalog(d, 4);
    const Shape base = testutil::random_shape(d, 20, rng);

    Shape moved = base;
    std::vector<double> t(static_cast<std::size_t>(d));
    for (double& v : t) v = shift(rng);
    for (std::size_t i = 0; i < moved.num_points(); ++i) {
      for (int a = 0; a < d; ++a) {
        moved.coords[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] +=
            t[static_cast<std::size_t>(a)];
      }
    }
    Shape scaled = base;
    const double c = std::exp(log_scale(rng));
    for (double& v : scaled.coords) v *= c;

    auto features = [&](const Shape& s) {
      const auto [norm, div] = scale_normalize(center(s));
      return feature_vector(compute_moments(norm, 4), catalog);
    };
    const InvariantVector fa = features(base);
    for (const Shape* variant : {&moved, &scaled}) {
      const InvariantVector fb = features(*variant);
      for (std::size_t i = 0; i < fa.values.size(); ++i) {
        if (!close_rel(fa.values[i], fb.values[i], 1e-9)) {
          detail = fa.names[i] + ": " + std::to_string(fa.values[i]) + " vs " +
                   std::to_string(fb.values[i]);
          return false;
        }
      }
    }
  }
  return true;
}

// ---- criterion 7: alignment recovery ---------------------------------------

bool alignment_recovery(std::string& detail) {
  std::mt19937_64 rng(7007);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = (rep % 2 == 0) ? 2 : 3;
    const Shape base = testutil::random_shape(d, 15, rng);
    const auto [p, pd] = scale_normalize(center(base));
    const MomentSet mp = compute_moments(p, 3);
    const Eigen::MatrixXd o = testutil::random_orthogonal(d, rng);
    TensorSet q;
    for (const auto& [r, t] : mp.tensors) q.emplace(r, rotate(t, o));

    OptimizeConfig config;
    config.seed = static_cast<std::uint64_t>(rep) + 1;
    const AlignmentResult result = optimize(mp.tensors, q, config);
    if (!(result.residual < 1e-6)) {
      detail = "rep " + std::to_string(rep) + " d=" + std::to_string(d) + " residual " +
               std::to_string(result.residual);
      return false;
    }
    if (d == 2) {
      const auto [angle, oracle] = grid_oracle_2d(mp.tensors, q, 3600);
      if (!(result.residual <= oracle + 1e-8)) {
        detail = "rep " + std::to_string(rep) + " worse than grid oracle";
        return false;
      }
    }
  }
  return true;
}

// ---- criterion 8: anisotropic stretch is detected --------------------------

bool discrimination(std::string& detail) {
  auto features = [](const Shape& s) {
    const auto [norm, div] = scale_normalize(center(s));
    return feature_vector(compute_moments(norm, 4), default_catalog(2, 4));
  };
  std::mt19937_64 rng(8008);
  std::vector<Shape> fixtures;
  fixtures.push_back(make_shape(2, {1, 0, -1, 0, 0, 1, 0, -1}, {1, 1, 1, 1}));
  fixtures.push_back(testutil::random_shape(2, 25, rng));
  fixtures.push_back(synthetic_blob());
  for (std::size_t k = 0; k < fixtures.size(); ++k) {
    Shape stretched = fixtures[k];
    for (std::size_t i = 0; i < stretched.num_points(); ++i) stretched.coords[i * 2] *= 2.0;
    if (stretched.grid) stretched.grid.reset();
    const double dist = similarity_distance(features(fixtures[k]), features(stretched));
    if (!(dist > 1e-2)) {
      detail = "fixture " + std::to_string(k) + " distance " + std::to_string(dist);
      return false;
    }
  }
  return true;
}

// ---- criterion 9: CLI determinism and the exit-code contract ---------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int run(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

bool cli_determinism(std::string& detail, const std::string& cli) {
  const fs::path work = fs::current_path() / "acceptance_cli";
  fs::create_directories(work);
  const std::string quoted = "'" + cli + "'";
  const std::string fdir = (work / "fixtures").string();
  if (run(quoted + " fixtures --out '" + fdir + "' > /dev/null") != 0) {
    detail = "fixtures generation failed";
    return false;
  }
  const std::string cross = fdir + "/cross.csv";
  const std::string cross_rot = fdir + "/cross_rot30.csv";

  const std::vector<std::string> runs = {
      " invariants '" + cross + "' --order 4 --seed 7 --out ",
      " compare '" + cross + "' '" + cross_rot + "' --order 4 --seed 7 --out ",
      " align '" + cross + "' '" + cross_rot + "' --order 3 --seed 7 --verify --out ",
      " encode '" + fdir + "/blob.pgm' --order 6 --seed 7 --out "};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const fs::path a = work / ("run" + std::to_string(k) + "a.json");
    const fs::path b = work / ("run" + std::to_string(k) + "b.json");
    if (run(quoted + runs[k] + "'" + a.string() + "'") != 0 ||
        run(quoted + runs[k] + "'" + b.string() + "'") != 0) {
      detail = "command " + std::to_string(k) + " failed";
      return false;
    }
    const std::string ca = slurp(a);
    if (ca.empty() || ca != slurp(b)) {
      detail = "outputs differ for command " + std::to_string(k);
      return false;
    }
  }

  // exit-code contract: 2 parse, 3 degenerate, 4 mismatch
  const fs::path bad = work / "bad.csv";
  std::ofstream(bad) << "1,oops\n";
  if (run(quoted + " moments '" + bad.string() + "' > /dev/null 2>&1") != 2) {
    detail = "parse error did not exit 2";
    return false;
  }
  const fs::path single = work / "single.csv";
  std::ofstream(single) << "1,2\n";
  if (run(quoted + " moments '" + single.string() + "' > /dev/null 2>&1") != 3) {
    detail = "degenerate shape did not exit 3";
    return false;
  }
  const fs::path three = work / "three.csv";
  std::ofstream(three) << "1,2,3\n4,5,6\n0,0,1\n-2,1,0\n";
  if (run(quoted + " compare '" + three.string() + "' '" + fdir +
          "/blob.pgm' --dim 3 > /dev/null 2>&1") != 4) {
    detail = "dimension mismatch did not exit 4";
    return false;
  }
  return true;
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];

  criterion("rotation-invariance of the default catalog", rotation_invariance);
  criterion("packed evaluation matches dense oracles", oracle_equivalence);
  criterion("trace powers match eigenvalue sums", trace_identity);
  criterion("basis orthonormality under quadrature", hermite_orthonormality);
  criterion("reconstruction error non-increasing in degree", reconstruction_monotonicity);
  criterion("translation and scale invariance of features", translation_scale_invariance);
  criterion("alignment recovery against synthetic rotations", alignment_recovery);
  criterion("anisotropic stretch is discriminated", discrimination);
  criterion("deterministic CLI output and exit codes",
            [&](std::string& detail) { return cli_determinism(detail, cli); });

  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
            << "\n";
  return failures == 0 ? 0 : 1;
}
