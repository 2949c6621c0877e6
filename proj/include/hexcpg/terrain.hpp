#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "hexcpg/errors.hpp"

namespace hexcpg {

// Regular-grid heightfield with bilinear interpolation. Queries outside the
// field are clamped to the edge.
struct Heightfield {
  double resolution = 0.05;              // m per cell
  Eigen::Vector2d origin{0.0, 0.0};      // world xy of cell (0, 0)
  Eigen::MatrixXd heights;               // heights(ix, iy), meters

  int nx() const { return static_cast<int>(heights.rows()); }
  int ny() const { return static_cast<int>(heights.cols()); }

  double height_at(double x, double y) const;
  Eigen::Vector3d normal_at(double x, double y) const;

  double max_height() const { return heights.maxCoeff(); }
  double min_height() const { return heights.minCoeff(); }
};

enum class TerrainType { kFlat, kUniform, kWave, kSlope };

const char* terrain_type_name(TerrainType t);
TerrainType terrain_type_from_name(const std::string& name);

struct TerrainExtent {
  double length = 4.0;  // m along x
  double width = 4.0;   // m along y
  double resolution = 0.05;
};

Heightfield gen_flat(const TerrainExtent& e = {});

// i.i.d. cell heights uniform in [-range, range], deterministic per seed.
Heightfield gen_random_uniform(double range, uint64_t seed,
                               const TerrainExtent& e = {});

// h(x, y) = amplitude * sin(2*pi*x / wavelength).
Heightfield gen_wave(double amplitude, double wavelength = 2.0,
                     const TerrainExtent& e = {});

// h(x, y) = tan(angle) * x.
Heightfield gen_slope(double angle, const TerrainExtent& e = {});

// Difficulty-scaled parameters; difficulty in [0, 1].
double uniform_range_for(double difficulty);   // 0 -> 0.03 m
double wave_amplitude_for(double difficulty);  // 0 -> 0.45 m
double slope_angle_for(double difficulty);     // 0 -> 15 deg

// One block per type/difficulty combination.
Heightfield gen_terrain(TerrainType type, double difficulty, uint64_t seed,
                        const TerrainExtent& e = {});

struct TerrainBlock {
  TerrainType type = TerrainType::kFlat;
  double difficulty = 0.0;
};

struct CurriculumGrid {
  static constexpr int kRows = 20;
  static constexpr int kCols = 10;
  std::array<std::array<TerrainBlock, kCols>, kRows> blocks;
  double block_size = 4.0;  // m
};

// Rows cycle through {uniform, wave, slope}; difficulty rises 0 -> 1 along
// each row's columns.
CurriculumGrid build_curriculum(uint64_t seed);

// CSV grid export: one row per x index, comma-separated heights.
void write_heightfield_csv(const Heightfield& hf, const std::string& path);

}  // namespace hexcpg
