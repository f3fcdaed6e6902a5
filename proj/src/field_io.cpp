#include "qpat/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qpat/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts are unsupported");

namespace qpat {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void atomic_write(const std::string& path, const std::string& payload) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open " + tmp + " for writing");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw_io("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw_io("cannot move " + tmp + " into place: " + ec.message());
}

}  // namespace

void write_field(const ScalarField& f, const std::string& path) {
  const DiscGrid& g = f.grid();
  std::string payload;
  payload += "QPATFLD 1\n";
  payload += "n=" + std::to_string(g.n()) + "\n";
  payload += "radius=" + format_double(g.radius()) + "\n";
  payload += "encoding=binary64\n";
  const auto vals = f.values();
  const std::size_t bytes = vals.size() * sizeof(double);
  const std::size_t head = payload.size();
  payload.resize(head + bytes);
  std::memcpy(payload.data() + head, vals.data(), bytes);
  atomic_write(path, payload);
}

ScalarField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path);
  std::string magic, n_line, r_line, enc_line;
  if (!std::getline(in, magic) || magic != "QPATFLD 1")
    throw_io(path + ": not a QPATFLD 1 file");
  if (!std::getline(in, n_line) || n_line.rfind("n=", 0) != 0)
    throw_io(path + ": missing n= header line");
  if (!std::getline(in, r_line) || r_line.rfind("radius=", 0) != 0)
    throw_io(path + ": missing radius= header line");
  if (!std::getline(in, enc_line) || enc_line != "encoding=binary64")
    throw_io(path + ": unsupported encoding");
  int n = 0;
  double radius = 0;
  try {
    n = std::stoi(n_line.substr(2));
    radius = std::stod(r_line.substr(7));
  } catch (const std::exception&) {
    throw_io(path + ": malformed header numbers");
  }
  if (n < 2 || !(radius > 0)) throw_io(path + ": invalid grid header");

  auto grid = build_disc_grid_unchecked(n, radius);
  ScalarField f(grid, kSentinel);
  auto vals = f.values();
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(vals.size() * sizeof(double)))
    throw_io(path + ": truncated data section");
  return f;
}

void write_pgm(const ScalarField& f, const std::string& path) {
  const DiscGrid& g = f.grid();
  const int n = g.n();
  double lo = 0, hi = 0;
  bool first = true;
  for (double v : f.values()) {
    if (!is_value(v)) continue;
    if (first) {
      lo = hi = v;
      first = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string payload = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  payload.reserve(payload.size() + static_cast<std::size_t>(n) * n);
  for (int iy = n - 1; iy >= 0; --iy) {  // row 0 of the image is y = +R
    for (int ix = 0; ix < n; ++ix) {
      const double v = f.at(ix, iy);
      unsigned char p = 0;
      if (is_value(v))
        p = static_cast<unsigned char>(std::lround(255.0 * (v - lo) / span));
      payload.push_back(static_cast<char>(p));
    }
  }
  atomic_write(path, payload);
}

PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path);
  auto next_token = [&in, &path]() {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) throw_io(path + ": truncated graymap header");
      if (c == '#') {  // comment to end of line
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };
  if (next_token() != "P5") throw_io(path + ": not a binary P5 graymap");
  PgmImage img;
  try {
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    img.maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw_io(path + ": malformed graymap header");
  }
  if (img.width < 2 || img.height < 2 || img.maxval < 1 || img.maxval > 255)
    throw_io(path + ": unsupported graymap dimensions (need 8-bit, >= 2x2)");
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw_io(path + ": truncated graymap data");
  return img;
}

void write_manifest(const ForwardManifest& m, const std::string& path) {
  nlohmann::json j;
  j["fine_n"] = m.fine_n;
  j["meas_n"] = m.meas_n;
  j["radius"] = m.radius;
  j["noise_level"] = m.noise_level;
  j["seed"] = m.seed;
  j["illuminations"] = nlohmann::json::array();
  for (const auto& s : m.illuminations) {
    j["illuminations"].push_back({{"peak_angle", s.peak_angle},
                                  {"std", s.std},
                                  {"amplitude", s.amplitude},
                                  {"floor", s.floor}});
  }
  j["field_files"] = m.field_files;
  atomic_write(path, j.dump(2) + "\n");
}

ForwardManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    ForwardManifest m;
    m.fine_n = j.at("fine_n").get<int>();
    m.meas_n = j.at("meas_n").get<int>();
    m.radius = j.at("radius").get<double>();
    m.noise_level = j.at("noise_level").get<double>();
    m.seed = j.at("seed").get<unsigned long long>();
    for (const auto& s : j.at("illuminations")) {
      IlluminationSpec spec;
      spec.peak_angle = s.at("peak_angle").get<double>();
      spec.std = s.at("std").get<double>();
      spec.amplitude = s.at("amplitude").get<double>();
      spec.floor = s.at("floor").get<double>();
      m.illuminations.push_back(spec);
    }
    m.field_files = j.at("field_files").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw_io(path + ": malformed manifest: " + e.what());
  }
}

ScalarField mask_to_field(const Mask& mask, std::shared_ptr<const DiscGrid> grid) {
  ScalarField f(grid, 0.0);
  for (int idx = 0; idx < grid->size(); ++idx)
    if (is_value(f[idx])) f[idx] = mask[idx] ? 1.0 : 0.0;
  return f;
}

Mask field_to_mask(const ScalarField& f) {
  Mask m(f.size(), 0);
  for (int idx = 0; idx < f.size(); ++idx)
    if (is_value(f[idx]) && f[idx] > 0.5) m[idx] = 1;
  return m;
}

}  // namespace qpat
