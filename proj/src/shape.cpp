#include "shapeinv/shape.hpp"

#include "shapeinv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace shapeinv {

double GridInfo::cell_volume() const {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

std::size_t GridInfo::cell_count() const {
  std::size_t n = 1;
  for (int e : extents) n *= static_cast<std::size_t>(e);
  return n;
}

std::vector<double> GridInfo::cell_center(std::size_t flat) const {
  std::vector<double> x(origin.size());
  for (std::size_t a = 0; a < origin.size(); ++a) {
    const auto e = static_cast<std::size_t>(extents[a]);
    x[a] = origin[a] + static_cast<double>(flat % e) * spacing[a];
    flat /= e;
  }
  return x;
}

void Shape::normalize_measure() {
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ParseError("negative weight");
    sum += w;
  }
  if (sum <= 0.0) throw DegenerateShapeError("zero total weight");
  total_weight = sum;
  for (double& w : weights) w /= sum;
}

Shape make_shape(int dim, std::vector<double> coords, std::vector<double> weights) {
  if (dim < 1) throw std::invalid_argument("make_shape: dim must be positive");
  if (coords.size() != weights.size() * static_cast<std::size_t>(dim)) {
    throw MismatchError("make_shape: coords/weights size mismatch");
  }
  Shape s;
  s.dim = dim;
  s.coords = std::move(coords);
  s.weights = std::move(weights);
  s.normalize_measure();
  return s;
}

namespace {

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(trim(token));
  return out;
}

Shape load_csv(const std::filesystem::path& path, int dim_hint) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::vector<double> coords, weights;
  int columns = -1;
  bool has_weight_column = false;
  int dim = dim_hint;
  std::string line;
  int line_no = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto tokens = split_csv(line);
    double value = 0.0;
    if (first_data_row && !parse_double(tokens[0], value)) {
      continue; // header line
    }
    if (columns < 0) {
      columns = static_cast<int>(tokens.size());
      if (dim_hint > 0) {
        if (columns == dim_hint) {
          has_weight_column = false;
        } else if (columns == dim_hint + 1) {
          has_weight_column = true;
        } else {
          throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(dim_hint) + " or " + std::to_string(dim_hint + 1) +
                           " columns, got " + std::to_string(columns));
        }
      } else {
        dim = columns;
        has_weight_column = false;
      }
    }
    first_data_row = false;
    if (static_cast<int>(tokens.size()) != columns) {
      throw ParseError("line " + std::to_string(line_no) + ": inconsistent column count");
    }
    for (int c = 0; c < dim; ++c) {
      if (!parse_double(tokens[static_cast<std::size_t>(c)], value)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                         tokens[static_cast<std::size_t>(c)] + "'");
      }
      coords.push_back(value);
    }
    if (has_weight_column) {
      if (!parse_double(tokens.back(), value)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad weight '" + tokens.back() +
                         "'");
      }
      if (value < 0.0) {
        throw ParseError("line " + std::to_string(line_no) + ": negative weight");
      }
      weights.push_back(value);
    } else {
      weights.push_back(1.0);
    }
  }
  if (weights.empty()) throw ParseError("no data rows in " + path.string());
  return make_shape(dim, std::move(coords), std::move(weights));
}

double atomic_mass(const std::string& element) {
  static const std::unordered_map<std::string, double> table = {
      {"H", 1.008},    {"He", 4.0026},  {"Li", 6.94},    {"Be", 9.0122}, {"B", 10.81},
      {"C", 12.011},   {"N", 14.007},   {"O", 15.999},   {"F", 18.998},  {"Ne", 20.180},
      {"Na", 22.990},  {"Mg", 24.305},  {"Al", 26.982},  {"Si", 28.085}, {"P", 30.974},
      {"S", 32.06},    {"Cl", 35.45},   {"Ar", 39.948},  {"K", 39.098},  {"Ca", 40.078},
      {"Fe", 55.845},  {"Cu", 63.546},  {"Zn", 65.38},   {"Br", 79.904}, {"I", 126.90},
  };
  const auto it = table.find(element);
  if (it == table.end()) {
    throw ParseError("unknown element symbol '" + element + "' for mass weighting");
  }
  return it->second;
}

Shape load_xyz(const std::filesystem::path& path, XyzWeighting weighting) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty xyz file");
  int count = 0;
  try {
    count = std::stoi(trim(line));
  } catch (const std::exception&) {
    throw ParseError("line 1: bad atom count '" + trim(line) + "'");
  }
  std::getline(in, line); // comment
  std::vector<double> coords, weights;
  int line_no = 2;
  for (int i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of file after " + std::to_string(i) + " atoms");
    }
    ++line_no;
    std::stringstream ss(line);
    std::string element;
    double x = 0.0, y = 0.0, z = 0.0;
    if (!(ss >> element >> x >> y >> z)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'element x y z'");
    }
    coords.insert(coords.end(), {x, y, z});
    weights.push_back(weighting == XyzWeighting::mass ? atomic_mass(element) : 1.0);
  }
  if (weights.empty()) throw ParseError("xyz file with zero atoms");
  return make_shape(3, std::move(coords), std::move(weights));
}

// Next whitespace-delimited token, skipping '#' comments to end of line.
std::string pgm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

} // namespace

Shape load_points(const std::filesystem::path& path, PointFormat format, int dim_hint,
                  XyzWeighting weighting) {
  switch (format) {
    case PointFormat::csv:
      return load_csv(path, dim_hint);
    case PointFormat::xyz:
      return load_xyz(path, weighting);
  }
  throw std::invalid_argument("load_points: unknown format");
}

Shape load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw ParseError("not a PGM file (magic '" + magic + "')");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(pgm_token(in));
    height = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw ParseError("malformed PGM header");
  }
  if (width < 1 || height < 1) throw ParseError("malformed PGM header: bad dimensions");
  if (maxval < 1 || maxval > 65535) throw ParseError("PGM maxval out of range");

  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> pixels(n); // row-major, pixels[row*width + col]
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string token = pgm_token(in);
      if (token.empty()) throw ParseError("truncated P2 pixel data");
      try {
        pixels[i] = std::stod(token);
      } catch (const std::exception&) {
        throw ParseError("bad P2 pixel value '" + token + "'");
      }
    }
  } else {
    // header ends after the single whitespace byte consumed by pgm_token
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      throw ParseError("truncated P5 pixel data");
    }
    for (std::size_t i = 0; i < n; ++i) {
      pixels[i] = bytes == 1 ? raw[i]
                             : 256.0 * raw[2 * i] + raw[2 * i + 1]; // big-endian
    }
  }
  for (double v : pixels) {
    if (v < 0.0 || v > maxval) throw ParseError("PGM pixel value out of range");
  }

  // cell (ix, iy) with ix = col, iy = height-1-row; axis 0 fastest in flat order
  std::vector<double> coords, weights;
  coords.reserve(2 * n);
  weights.reserve(n);
  for (int iy = 0; iy < height; ++iy) {
    for (int ix = 0; ix < width; ++ix) {
      const int row = height - 1 - iy;
      coords.push_back(static_cast<double>(ix));
      coords.push_back(static_cast<double>(iy));
      weights.push_back(pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                               static_cast<std::size_t>(ix)]);
    }
  }
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0) throw DegenerateShapeError("all-zero image");

  Shape s = make_shape(2, std::move(coords), std::move(weights));
  s.grid = GridInfo{{0.0, 0.0}, {1.0, 1.0}, {width, height}};
  return s;
}

double expectation(const Shape& shape,
                   const std::function<double(std::span<const double>)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < shape.num_points(); ++i) {
    sum += shape.weights[i] * f(shape.point(i));
  }
  return sum;
}

std::vector<double> center_of_mass(const Shape& shape) {
  std::vector<double> com(static_cast<std::size_t>(shape.dim), 0.0);
  for (std::size_t i = 0; i < shape.num_points(); ++i) {
    const auto p = shape.point(i);
    for (int a = 0; a < shape.dim; ++a) {
      com[static_cast<std::size_t>(a)] += shape.weights[i] * p[static_cast<std::size_t>(a)];
    }
  }
  return com;
}

Shape center(const Shape& shape) {
  const auto com = center_of_mass(shape);
  Shape out = shape;
  for (std::size_t i = 0; i < out.num_points(); ++i) {
    for (int a = 0; a < out.dim; ++a) {
      out.coords[i * static_cast<std::size_t>(out.dim) + static_cast<std::size_t>(a)] -=
          com[static_cast<std::size_t>(a)];
    }
  }
  if (out.grid) {
    for (int a = 0; a < out.dim; ++a) {
      out.grid->origin[static_cast<std::size_t>(a)] -= com[static_cast<std::size_t>(a)];
    }
  }
  out.centered = true;
  return out;
}

SymTensor covariance(const Shape& shape) {
  if (!shape.centered) throw MismatchError("covariance: shape is not centered");
  return central_moment(shape, 2);
}

std::pair<Shape, double> scale_normalize(const Shape& shape) {
  if (!shape.centered) throw MismatchError("scale_normalize: shape is not centered");
  const SymTensor cov = covariance(shape);
  const double trace = trace_power(cov, 1);
  if (!(trace > 0.0)) throw DegenerateShapeError("degenerate shape: zero covariance trace");
  const double divisor = std::sqrt(trace / static_cast<double>(shape.dim));
  Shape out = shape;
  for (double& c : out.coords) c /= divisor;
  if (out.grid) {
    for (double& o : out.grid->origin) o /= divisor;
    for (double& s : out.grid->spacing) s /= divisor;
  }
  out.scale_normalized = true;
  return {std::move(out), divisor};
}

SymTensor central_moment(const Shape& shape, int order) {
  if (order < 0) throw std::invalid_argument("central_moment: order must be >= 0");
  if (order >= 1 && !shape.centered) {
    throw MismatchError("central_moment: shape is not centered");
  }
  SymTensor t(shape.dim, order);
  if (order == 0) {
    double sum = 0.0;
    for (double w : shape.weights) sum += w;
    t[0] = sum;
    return t;
  }
  for (std::size_t i = 0; i < shape.num_points(); ++i) {
    const auto p = shape.point(i);
    const double w = shape.weights[i];
    for_each_packed(shape.dim, order, [&](std::span<const int> idx, std::size_t offset) {
      double prod = w;
      for (int axis : idx) prod *= p[static_cast<std::size_t>(axis)];
      t[offset] += prod;
    });
  }
  return t;
}

MomentSet compute_moments(const Shape& shape, int order_max) {
  MomentSet ms;
  ms.dim = shape.dim;
  ms.order_max = order_max;
  ms.centered = shape.centered;
  ms.scale_normalized = shape.scale_normalized;
  for (int r = 0; r <= order_max; ++r) {
    ms.tensors.emplace(r, central_moment(shape, r));
  }
  return ms;
}

} // namespace shapeinv
