#include <doctest.h>

#include <cmath>

#include "hexcpg/terrain.hpp"
#include "hexcpg/rng.hpp"

using namespace hexcpg;

TEST_CASE("zero-range uniform terrain is flat") {
  const Heightfield hf = gen_random_uniform(0.0, 1);
  CHECK(hf.max_height() == 0.0);
  CHECK(hf.min_height() == 0.0);
}

TEST_CASE("uniform terrain respects the sampling range") {
  const Heightfield hf = gen_random_uniform(0.03, 7);
  CHECK(hf.min_height() >= -0.03);
  CHECK(hf.max_height() <= 0.03);
  CHECK(hf.max_height() - hf.min_height() <= 0.06);
}

TEST_CASE("uniform terrain is deterministic per seed") {
  const Heightfield a = gen_random_uniform(0.03, 99);
  const Heightfield b = gen_random_uniform(0.03, 99);
  const Heightfield c = gen_random_uniform(0.03, 100);
  CHECK(a.heights == b.heights);
  CHECK(a.heights != c.heights);
}

TEST_CASE("wave terrain amplitude") {
  CHECK(gen_wave(0.0).max_height() == 0.0);
  const Heightfield big = gen_wave(0.45);
  CHECK(big.max_height() <= 0.45 + 1e-12);
  CHECK(big.max_height() > 0.45 - 0.05);  // peak within one cell
  const Heightfield eval = gen_wave(0.5);
  CHECK(std::abs(eval.max_height() - 0.5) <= 0.05);
}

TEST_CASE("slope terrain grade") {
  CHECK(gen_slope(0.0).max_height() == 0.0);
  const double angle = 15.0 * M_PI / 180.0;
  const Heightfield hf = gen_slope(angle);
  CHECK(hf.height_at(1.0, 1.0) == doctest::Approx(0.26794919).epsilon(1e-6));
  const double grade = (hf.height_at(2.0, 1.0) - hf.height_at(1.0, 1.0)) / 1.0;
  CHECK(std::abs(grade - std::tan(angle)) < 1e-6);
}

TEST_CASE("height and normal queries on a flat field") {
  const Heightfield hf = gen_flat();
  CHECK(hf.height_at(1.3, 2.7) == 0.0);
  CHECK(hf.normal_at(1.3, 2.7).isApprox(Eigen::Vector3d(0, 0, 1)));
}

TEST_CASE("slope normal tilts by the slope angle") {
  const double angle = 0.2;
  const Heightfield hf = gen_slope(angle);
  const Eigen::Vector3d n = hf.normal_at(2.0, 2.0);
  CHECK(std::acos(n.z()) == doctest::Approx(angle).epsilon(1e-6));
  CHECK(n.x() < 0.0);  // uphill along +x, normal leans back
}

TEST_CASE("cell centers return stored heights exactly") {
  const Heightfield hf = gen_random_uniform(0.03, 5);
  for (int i : {0, 7, 33}) {
    for (int j : {0, 11, 60}) {
      const double x = hf.origin.x() + i * hf.resolution;
      const double y = hf.origin.y() + j * hf.resolution;
      CHECK(hf.height_at(x, y) == doctest::Approx(hf.heights(i, j)));
    }
  }
}

TEST_CASE("normals are unit length and height_at is continuous") {
  const Heightfield hf = gen_random_uniform(0.03, 12);
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(0.0, 3.9);
    const double y = rng.uniform(0.0, 3.9);
    CHECK(std::abs(hf.normal_at(x, y).norm() - 1.0) < 1e-9);
    const double d = 1e-7;
    CHECK(std::abs(hf.height_at(x + d, y) - hf.height_at(x, y)) < 1e-5);
  }
}

TEST_CASE("queries beyond the field clamp to the edge") {
  const Heightfield hf = gen_slope(0.1, {4.0, 4.0, 0.05});
  CHECK(hf.height_at(100.0, 2.0) == doctest::Approx(hf.height_at(4.0, 2.0)));
  CHECK(hf.height_at(-5.0, 2.0) == doctest::Approx(hf.height_at(0.0, 2.0)));
}

TEST_CASE("curriculum grid shape and difficulty grading") {
  const CurriculumGrid grid = build_curriculum(1);
  CHECK(CurriculumGrid::kRows == 20);
  CHECK(CurriculumGrid::kCols == 10);
  for (int r = 0; r < CurriculumGrid::kRows; ++r) {
    CHECK(grid.blocks[r][0].difficulty == 0.0);
    CHECK(grid.blocks[r][CurriculumGrid::kCols - 1].difficulty == 1.0);
    for (int c = 1; c < CurriculumGrid::kCols; ++c) {
      CHECK(grid.blocks[r][c].difficulty > grid.blocks[r][c - 1].difficulty);
      CHECK(grid.blocks[r][c].type == grid.blocks[r][0].type);
    }
  }
  // Difficulty-0 blocks are flat for every type.
  for (int r = 0; r < 3; ++r) {
    const Heightfield hf = gen_terrain(grid.blocks[r][0].type, 0.0, 1);
    CHECK(hf.max_height() == doctest::Approx(0.0));
    CHECK(hf.min_height() == doctest::Approx(0.0));
  }
  // Max-difficulty slope blocks carry the full 15-degree grade.
  const double expect = std::tan(slope_angle_for(1.0));
  const Heightfield steep = gen_terrain(TerrainType::kSlope, 1.0, 1);
  const double grade = (steep.height_at(2.0, 1.0) - steep.height_at(1.0, 1.0));
  CHECK(grade == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("difficulty scaling endpoints") {
  CHECK(uniform_range_for(1.0) == doctest::Approx(0.03));
  CHECK(wave_amplitude_for(1.0) == doctest::Approx(0.45));
  CHECK(slope_angle_for(1.0) == doctest::Approx(15.0 * M_PI / 180.0));
  CHECK(uniform_range_for(0.0) == 0.0);
}
