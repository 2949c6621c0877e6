#include "hexcpg/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hexcpg/rng.hpp"

namespace hexcpg {

namespace {

Heightfield make_field(const TerrainExtent& e) {
  Heightfield hf;
  hf.resolution = e.resolution;
  const int nx = std::max(2, static_cast<int>(std::round(e.length / e.resolution)) + 1);
  const int ny = std::max(2, static_cast<int>(std::round(e.width / e.resolution)) + 1);
  hf.heights = Eigen::MatrixXd::Zero(nx, ny);
  return hf;
}

}  // namespace

double Heightfield::height_at(double x, double y) const {
  const double gx = std::clamp((x - origin.x()) / resolution, 0.0,
                               static_cast<double>(nx() - 1));
  const double gy = std::clamp((y - origin.y()) / resolution, 0.0,
                               static_cast<double>(ny() - 1));
  const int ix = std::min(static_cast<int>(gx), nx() - 2);
  const int iy = std::min(static_cast<int>(gy), ny() - 2);
  const double fx = gx - ix;
  const double fy = gy - iy;
  return heights(ix, iy) * (1.0 - fx) * (1.0 - fy) +
         heights(ix + 1, iy) * fx * (1.0 - fy) +
         heights(ix, iy + 1) * (1.0 - fx) * fy +
         heights(ix + 1, iy + 1) * fx * fy;
}

Eigen::Vector3d Heightfield::normal_at(double x, double y) const {
  const double d = 0.5 * resolution;
  const double dhdx = (height_at(x + d, y) - height_at(x - d, y)) / (2.0 * d);
  const double dhdy = (height_at(x, y + d) - height_at(x, y - d)) / (2.0 * d);
  return Eigen::Vector3d(-dhdx, -dhdy, 1.0).normalized();
}

const char* terrain_type_name(TerrainType t) {
  switch (t) {
    case TerrainType::kFlat:
      return "flat";
    case TerrainType::kUniform:
      return "uniform";
    case TerrainType::kWave:
      return "wave";
    case TerrainType::kSlope:
      return "slope";
  }
  return "flat";
}

TerrainType terrain_type_from_name(const std::string& name) {
  if (name == "flat") return TerrainType::kFlat;
  if (name == "uniform") return TerrainType::kUniform;
  if (name == "wave") return TerrainType::kWave;
  if (name == "slope") return TerrainType::kSlope;
  throw ConfigError("unknown terrain type: " + name);
}

Heightfield gen_flat(const TerrainExtent& e) { return make_field(e); }

Heightfield gen_random_uniform(double range, uint64_t seed,
                               const TerrainExtent& e) {
  Heightfield hf = make_field(e);
  Rng rng(seed);
  for (int i = 0; i < hf.nx(); ++i) {
    for (int j = 0; j < hf.ny(); ++j) {
      hf.heights(i, j) = rng.uniform(-range, range);
    }
  }
  return hf;
}

Heightfield gen_wave(double amplitude, double wavelength,
                     const TerrainExtent& e) {
  Heightfield hf = make_field(e);
  for (int i = 0; i < hf.nx(); ++i) {
    const double x = i * hf.resolution;
    const double h = amplitude * std::sin(2.0 * M_PI * x / wavelength);
    hf.heights.row(i).setConstant(h);
  }
  return hf;
}

Heightfield gen_slope(double angle, const TerrainExtent& e) {
  Heightfield hf = make_field(e);
  const double grade = std::tan(angle);
  for (int i = 0; i < hf.nx(); ++i) {
    hf.heights.row(i).setConstant(grade * i * hf.resolution);
  }
  return hf;
}

double uniform_range_for(double difficulty) { return 0.03 * difficulty; }

double wave_amplitude_for(double difficulty) { return 0.45 * difficulty; }

double slope_angle_for(double difficulty) {
  return difficulty * 15.0 * M_PI / 180.0;
}

Heightfield gen_terrain(TerrainType type, double difficulty, uint64_t seed,
                        const TerrainExtent& e) {
  switch (type) {
    case TerrainType::kFlat:
      return gen_flat(e);
    case TerrainType::kUniform:
      return gen_random_uniform(uniform_range_for(difficulty), seed, e);
    case TerrainType::kWave:
      return gen_wave(wave_amplitude_for(difficulty), 2.0, e);
    case TerrainType::kSlope:
      return gen_slope(slope_angle_for(difficulty), e);
  }
  return gen_flat(e);
}

CurriculumGrid build_curriculum(uint64_t seed) {
  (void)seed;  // block layout is deterministic; seeds enter per-block fields
  CurriculumGrid grid;
  const std::array<TerrainType, 3> cycle = {
      TerrainType::kUniform, TerrainType::kWave, TerrainType::kSlope};
  for (int r = 0; r < CurriculumGrid::kRows; ++r) {
    for (int c = 0; c < CurriculumGrid::kCols; ++c) {
      grid.blocks[r][c].type = cycle[r % 3];
      grid.blocks[r][c].difficulty =
          static_cast<double>(c) / (CurriculumGrid::kCols - 1);
    }
  }
  return grid;
}

void write_heightfield_csv(const Heightfield& hf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw HexError("cannot open " + path);
  for (int i = 0; i < hf.nx(); ++i) {
    for (int j = 0; j < hf.ny(); ++j) {
      out << hf.heights(i, j);
      if (j + 1 < hf.ny()) out << ',';
    }
    out << '\n';
  }
}

}  // namespace hexcpg
