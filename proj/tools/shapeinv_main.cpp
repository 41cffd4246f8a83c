#include "shapeinv/align.hpp"
#include "shapeinv/errors.hpp"
#include "shapeinv/hermite.hpp"
#include "shapeinv/invariants.hpp"
#include "shapeinv/shape.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace shapeinv;

namespace {

constexpr const char* kFormatVersion = "1.0";

struct PipelineConfig {
  int dim = 2;
  int order = 4;
  std::string scale = "normalize"; // normalize | fixed:sigma | off
  std::string catalog = "default";
  double tol = 1e-8;
  std::uint64_t seed = 0;
  bool verify = false;
  std::string weights = "unit"; // xyz weighting: unit | mass
  std::string out;

  ScaleMode scale_mode() const {
    if (scale == "normalize") return ScaleMode::normalize;
    if (scale == "off") return ScaleMode::off;
    if (scale.rfind("fixed:", 0) == 0) return ScaleMode::fixed;
    throw ParseError("bad --scale value '" + scale + "'");
  }
  double fixed_sigma() const {
    if (scale.rfind("fixed:", 0) != 0) return 1.0;
    return std::stod(scale.substr(6));
  }

  json to_json() const {
    json j;
    j["dim"] = dim;
    j["order"] = order;
    j["scale"] = scale;
    j["catalog"] = catalog;
    j["tol"] = tol;
    j["seed"] = seed;
    return j;
  }
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Shape load_input(const fs::path& path, const PipelineConfig& config) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return load_points(path, PointFormat::csv, config.dim);
  if (ext == ".xyz") {
    return load_points(path, PointFormat::xyz, 3,
                       config.weights == "mass" ? XyzWeighting::mass : XyzWeighting::unit);
  }
  if (ext == ".pgm") return load_grid(path);
  throw ParseError("unsupported input extension '" + ext + "'");
}

// normalize measure -> center -> scale step per config
std::pair<Shape, double> pipeline(const Shape& raw, const PipelineConfig& config) {
  Shape s = center(raw);
  double scale = 1.0;
  switch (config.scale_mode()) {
    case ScaleMode::normalize: {
      auto [normalized, divisor] = scale_normalize(s);
      s = std::move(normalized);
      scale = divisor;
      break;
    }
    case ScaleMode::fixed: {
      scale = config.fixed_sigma();
      for (double& c : s.coords) c /= scale;
      if (s.grid) {
        for (double& o : s.grid->origin) o /= scale;
        for (double& sp : s.grid->spacing) sp /= scale;
      }
      break;
    }
    case ScaleMode::off:
      break;
  }
  return {std::move(s), scale};
}

InvariantCatalog resolve_catalog(const PipelineConfig& config, int dim, int order) {
  if (config.catalog == "default") return default_catalog(dim, std::min(order, 4));
  std::ifstream in(config.catalog);
  if (!in) throw ParseError("cannot open catalog file: " + config.catalog);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad catalog JSON: ") + e.what());
  }
  return InvariantCatalog::from_json(j);
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw ParseError("cannot write output file: " + out);
    file << text;
  }
}

json moments_json(const MomentSet& ms) {
  json tensors = json::array();
  for (const auto& [order, tensor] : ms.tensors) {
    json entries = json::array();
    for_each_packed(ms.dim, order, [&](std::span<const int> idx, std::size_t offset) {
      entries.push_back({{"index", std::vector<int>(idx.begin(), idx.end())},
                         {"value", tensor[offset]}});
    });
    tensors.push_back({{"order", order}, {"entries", std::move(entries)}});
  }
  json j;
  j["dim"] = ms.dim;
  j["order_max"] = ms.order_max;
  j["centered"] = ms.centered;
  j["scale_normalized"] = ms.scale_normalized;
  j["tensors"] = std::move(tensors);
  return j;
}

json features_json(const InvariantVector& v) {
  json j;
  j["names"] = v.names;
  j["values"] = v.values;
  return j;
}

int cmd_moments(const std::string& input, const PipelineConfig& config) {
  const Shape raw = load_input(input, config);
  auto [shape, scale] = pipeline(raw, config);
  const MomentSet ms = compute_moments(shape, config.order);
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config.to_json();
  j["scale"] = scale;
  j.update(moments_json(ms));
  emit(j, config.out);
  return 0;
}

int cmd_invariants(const std::string& input, const PipelineConfig& config) {
  const Shape raw = load_input(input, config);
  auto [shape, scale] = pipeline(raw, config);
  const MomentSet ms = compute_moments(shape, config.order);
  const InvariantCatalog catalog = resolve_catalog(config, ms.dim, config.order);
  const InvariantVector features = feature_vector(ms, catalog);
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config.to_json();
  j["scale"] = scale;
  j["features"] = features_json(features);
  emit(j, config.out);
  return 0;
}

int cmd_encode(const std::string& input, const PipelineConfig& config, bool gram_schmidt,
               bool with_l2) {
  const Shape raw = load_input(input, config);
  const HermiteCoeffs coeffs = encode_shape(raw, config.order, config.scale_mode(),
                                            config.fixed_sigma(), gram_schmidt);
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config.to_json();
  j.update(json(coeffs.to_json()));
  if (with_l2) {
    auto [shape, scale] = pipeline(raw, config);
    (void)scale;
    if (!shape.grid) throw MismatchError("--l2-error needs a grid input");
    j["l2_error"] = reconstruction_l2_error(shape, coeffs);
  }
  emit(j, config.out);
  return 0;
}

void write_pgm_p2(const fs::path& path, const GridInfo& grid, std::span<const double> field,
                  double gamma) {
  const int width = grid.extents[0];
  const int height = grid.extents[1];
  double peak = 0.0;
  for (double v : field) peak = std::max(peak, v);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write PGM: " + path.string());
  out << "P2\n" << width << " " << height << "\n255\n";
  for (int row = 0; row < height; ++row) {
    const int iy = height - 1 - row;
    for (int ix = 0; ix < width; ++ix) {
      const double v = field[static_cast<std::size_t>(iy) * static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(ix)];
      const double clipped = peak > 0.0 ? std::max(v, 0.0) / peak : 0.0;
      const int gray = static_cast<int>(std::lround(255.0 * std::pow(clipped, gamma)));
      out << gray << (ix + 1 == width ? "" : " ");
    }
    out << "\n";
  }
}

int cmd_reconstruct(const std::string& coeffs_path, const PipelineConfig& config, int width,
                    int height, double extent, double gamma) {
  std::ifstream in(coeffs_path);
  if (!in) throw ParseError("cannot open coeffs file: " + coeffs_path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad coeffs JSON: ") + e.what());
  }
  const HermiteCoeffs coeffs = HermiteCoeffs::from_json(j);
  GridInfo grid;
  grid.extents = {width, height};
  grid.spacing = {2.0 * extent / width, 2.0 * extent / height};
  grid.origin = {-extent + 0.5 * grid.spacing[0], -extent + 0.5 * grid.spacing[1]};
  const std::vector<double> field = reconstruct(coeffs, grid);
  if (config.out.empty()) throw ParseError("reconstruct requires --out PATH.pgm");
  write_pgm_p2(config.out, grid, field, gamma);
  return 0;
}

int cmd_compare(const std::string& input_a, const std::string& input_b,
                const PipelineConfig& config) {
  const Shape raw_a = load_input(input_a, config);
  const Shape raw_b = load_input(input_b, config);
  if (raw_a.dim != raw_b.dim) throw MismatchError("compare: input dimensions differ");
  auto [a, scale_a] = pipeline(raw_a, config);
  auto [b, scale_b] = pipeline(raw_b, config);
  const MomentSet ma = compute_moments(a, config.order);
  const MomentSet mb = compute_moments(b, config.order);
  const InvariantCatalog catalog = resolve_catalog(config, ma.dim, config.order);
  const InvariantVector fa = feature_vector(ma, catalog);
  const InvariantVector fb = feature_vector(mb, catalog);
  const EquivalenceReport report = rotation_equivalence_test(ma, mb, config.tol);

  json deltas = json::array();
  for (std::size_t i = 0; i < fa.names.size(); ++i) {
    deltas.push_back({{"name", fa.names[i]}, {"delta", fa.values[i] - fb.values[i]}});
  }
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config.to_json();
  j["features_a"] = features_json(fa);
  j["features_b"] = features_json(fb);
  j["deltas"] = std::move(deltas);
  j["distance_l2"] = similarity_distance(fa, fb, DistanceNorm::L2);
  j["distance_linf"] = similarity_distance(fa, fb, DistanceNorm::Linf);
  j["equivalent"] = report.equivalent;
  j["worst_invariant"] = report.worst_name;
  j["worst_delta"] = report.worst_delta;
  emit(j, config.out);
  return 0;
}

int cmd_align(const std::string& input_a, const std::string& input_b,
              const PipelineConfig& config) {
  const Shape raw_a = load_input(input_a, config);
  const Shape raw_b = load_input(input_b, config);
  if (raw_a.dim != raw_b.dim) throw MismatchError("align: input dimensions differ");
  auto [a, scale_a] = pipeline(raw_a, config);
  auto [b, scale_b] = pipeline(raw_b, config);
  const MomentSet ma = compute_moments(a, config.order);
  const MomentSet mb = compute_moments(b, config.order);

  OptimizeConfig opt;
  opt.seed = config.seed;
  const AlignmentResult result = optimize(ma.tensors, mb.tensors, opt);

  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config.to_json();
  json optimized;
  std::vector<double> matrix_row_major;
  for (int r = 0; r < ma.dim; ++r) {
    for (int c = 0; c < ma.dim; ++c) matrix_row_major.push_back(result.rotation.matrix()(r, c));
  }
  optimized["rotation"] = matrix_row_major;
  optimized["params"] = result.rotation.params();
  optimized["residual"] = result.residual;
  optimized["converged"] = result.converged;
  optimized["restarts_used"] = result.restarts_used;
  json trace = json::array();
  for (const auto& [iter, value] : result.objective_trace) trace.push_back({iter, value});
  optimized["objective_trace"] = std::move(trace);
  j["optimized"] = std::move(optimized);
  if (config.verify) {
    if (ma.dim != 2) throw MismatchError("--verify is only available for d = 2");
    const auto [angle, residual] = grid_oracle_2d(ma.tensors, mb.tensors, 3600);
    j["oracle"] = {{"angle", angle}, {"residual", residual}};
  }
  emit(j, config.out);
  return 0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write fixture: " + path.string());
  out << text;
}

void write_csv_points(const fs::path& path, const std::vector<double>& coords, int dim) {
  std::string text;
  for (std::size_t i = 0; i < coords.size() / static_cast<std::size_t>(dim); ++i) {
    for (int a = 0; a < dim; ++a) {
      text += format_double(coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)]);
      text += (a + 1 == dim) ? "\n" : ",";
    }
  }
  write_text(path, text);
}

int cmd_fixtures(const std::string& out_dir, std::uint64_t seed) {
  const fs::path dir = out_dir.empty() ? fs::path("fixtures") : fs::path(out_dir);
  fs::create_directories(dir);

  write_text(dir / "cross.csv", "1,0\n-1,0\n0,1\n0,-1\n");
  {
    const double angle = std::numbers::pi / 6.0;
    const double c = std::cos(angle), s = std::sin(angle);
    std::vector<double> base{1, 0, -1, 0, 0, 1, 0, -1};
    std::vector<double> rotated;
    for (std::size_t i = 0; i < 4; ++i) {
      const double x = base[2 * i], y = base[2 * i + 1];
      rotated.push_back(c * x - s * y);
      rotated.push_back(s * x + c * y);
    }
    write_csv_points(dir / "cross_rot30.csv", rotated, 2);
  }
  write_text(dir / "cross_stretch2.csv", "2,0\n-2,0\n0,1\n0,-1\n");

  // smooth two-bump blob, 28x28
  {
    std::string pgm = "P2\n28 28\n255\n";
    std::vector<double> values;
    double peak = 0.0;
    for (int row = 0; row < 28; ++row) {
      for (int col = 0; col < 28; ++col) {
        const double x = col - 13.5, y = 13.5 - row;
        const double bump1 = std::exp(-((x - 3) * (x - 3) + (y - 2) * (y - 2)) / (2 * 16.0));
        const double bump2 = 0.7 * std::exp(-((x + 4) * (x + 4) + (y + 3) * (y + 3)) / (2 * 9.0));
        values.push_back(bump1 + bump2);
        peak = std::max(peak, values.back());
      }
    }
    std::size_t i = 0;
    for (int row = 0; row < 28; ++row) {
      for (int col = 0; col < 28; ++col) {
        pgm += std::to_string(static_cast<int>(std::lround(255.0 * values[i++] / peak)));
        pgm += (col == 27) ? "\n" : " ";
      }
    }
    write_text(dir / "blob.pgm", pgm);
  }
  // exact 90-degree pixel rotation of the blob
  {
    const Shape blob = load_grid(dir / "blob.pgm");
    std::string pgm = "P2\n28 28\n255\n";
    // new(row, col) = old(col, 27 - row)
    std::vector<int> old_pixels(28 * 28);
    {
      std::ifstream in(dir / "blob.pgm");
      std::string token;
      in >> token >> token >> token >> token; // magic, w, h, maxval
      for (int& v : old_pixels) in >> v;
    }
    for (int row = 0; row < 28; ++row) {
      for (int col = 0; col < 28; ++col) {
        pgm += std::to_string(old_pixels[col * 28 + (27 - row)]);
        pgm += (col == 27) ? "\n" : " ";
      }
    }
    write_text(dir / "blob_rot90.pgm", pgm);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int dim : {2, 3}) {
    std::vector<double> coords;
    for (int i = 0; i < 12 * dim; ++i) coords.push_back(normal(rng));
    const std::string tag = "rand" + std::to_string(dim);
    write_csv_points(dir / (tag + ".csv"), coords, dim);

    std::vector<double> params;
    for (int k = 0; k < Rotation::param_count(dim); ++k) params.push_back(normal(rng));
    const Rotation rot(dim, params);
    std::vector<double> rotated(coords.size(), 0.0);
    for (std::size_t i = 0; i < coords.size() / static_cast<std::size_t>(dim); ++i) {
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          rotated[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(r)] +=
              rot.matrix()(r, c) * coords[i * static_cast<std::size_t>(dim) +
                                          static_cast<std::size_t>(c)];
        }
      }
    }
    write_csv_points(dir / (tag + "_rot.csv"), rotated, dim);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation-invariant shape descriptors from moment tensors and "
               "Hermite expansions"};
  app.require_subcommand(1);

  PipelineConfig config;
  std::string input_a, input_b, coeffs_path, fixtures_dir;
  bool gram_schmidt = false, with_l2 = false;
  int width = 28, height = 28;
  double extent = 4.0, gamma = 1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--dim", config.dim, "point dimension for CSV inputs");
    cmd->add_option("--order,-m", config.order, "maximum tensor order / total degree");
    cmd->add_option("--scale", config.scale, "normalize | fixed:sigma | off");
    cmd->add_option("--catalog", config.catalog, "invariant catalog JSON path or 'default'");
    cmd->add_option("--tol", config.tol, "equivalence tolerance");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--weights", config.weights, "xyz weighting: unit | mass");
    cmd->add_option("--out", config.out, "output path (stdout if omitted)");
  };

  auto* moments = app.add_subcommand("moments", "central moment tensors up to --order");
  moments->add_option("input", input_a, "shape file (.csv/.xyz/.pgm)")->required();
  add_common(moments);

  auto* invariants_cmd = app.add_subcommand("invariants", "rotation-invariant feature vector");
  invariants_cmd->add_option("input", input_a)->required();
  add_common(invariants_cmd);

  auto* encode = app.add_subcommand("encode", "Hermite-Gaussian coefficients");
  encode->add_option("input", input_a)->required();
  add_common(encode);
  encode->add_flag("--gram-schmidt", gram_schmidt, "lattice re-orthogonalization (grids)");
  encode->add_flag("--l2-error", with_l2, "report reconstruction L2 error (grids)");

  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "decode coefficients to a PGM");
  reconstruct_cmd->add_option("coeffs", coeffs_path, "coefficients JSON")->required();
  add_common(reconstruct_cmd);
  reconstruct_cmd->add_option("--width", width);
  reconstruct_cmd->add_option("--height", height);
  reconstruct_cmd->add_option("--extent", extent, "half-width of the grid in normalized units");
  reconstruct_cmd->add_option("--gamma", gamma, "export gamma");

  auto* compare = app.add_subcommand("compare", "invariant comparison modulo rotation");
  compare->add_option("input_a", input_a)->required();
  compare->add_option("input_b", input_b)->required();
  add_common(compare);

  auto* align_cmd = app.add_subcommand("align", "explicit SO(d) alignment");
  align_cmd->add_option("input_a", input_a)->required();
  align_cmd->add_option("input_b", input_b)->required();
  add_common(align_cmd);
  align_cmd->add_flag("--verify", config.verify, "also run the 2D grid oracle");

  auto* fixtures = app.add_subcommand("fixtures", "generate synthetic test shapes");
  fixtures->add_option("--out", fixtures_dir, "output directory (default ./fixtures)");
  fixtures->add_option("--seed", config.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (moments->parsed()) return cmd_moments(input_a, config);
    if (invariants_cmd->parsed()) return cmd_invariants(input_a, config);
    if (encode->parsed()) return cmd_encode(input_a, config, gram_schmidt, with_l2);
    if (reconstruct_cmd->parsed()) {
      return cmd_reconstruct(coeffs_path, config, width, height, extent, gamma);
    }
    if (compare->parsed()) return cmd_compare(input_a, input_b, config);
    if (align_cmd->parsed()) return cmd_align(input_a, input_b, config);
    if (fixtures->parsed()) return cmd_fixtures(fixtures_dir, config.seed);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const MismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
