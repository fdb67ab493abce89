#include <doctest.h>

#include <array>
#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "stitch/histogram.hpp"
#include "stitch/image_io.hpp"
#include "stitch/integral.hpp"

using namespace stitch;
using test::constant_frame;
using test::random_frame;

namespace {

// Brute-force tally, the independent oracle for compute_histogram.
std::array<std::array<std::uint32_t, 256>, 3> tally(const Frame& f,
                                                    const Region& r) {
  std::array<std::array<std::uint32_t, 256>, 3> bins{};
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) {
      if (!f.valid_at(x, y)) continue;
      const std::uint8_t* p = f.px(x, y);
      for (int c = 0; c < 3; ++c) ++bins[c][p[c]];
    }
  }
  return bins;
}

}  // namespace

TEST_CASE("quantize_channel rounds half away from zero and clamps") {
  CHECK(quantize_channel(0.5) == 1);
  CHECK(quantize_channel(1.5) == 2);
  CHECK(quantize_channel(2.4) == 2);
  CHECK(quantize_channel(254.5) == 255);
  CHECK(quantize_channel(-3.0) == 0);
  CHECK(quantize_channel(300.0) == 255);
}

TEST_CASE("histogram of a constant region") {
  const Frame f = constant_frame(16, 16, 128, 128, 128);
  const Histogram256 h = compute_histogram(f, Region{3, 3, 13, 13});
  CHECK(h.total == 100);
  for (int c = 0; c < 3; ++c) {
    CHECK(h.bins[c][128] == 100);
    for (int v = 0; v < 256; ++v) {
      if (v != 128) CHECK(h.bins[c][v] == 0);
    }
  }
}

TEST_CASE("histogram of a two-pixel frame") {
  Frame f(2, 1);
  f.data = {0, 0, 0, 255, 255, 255};
  const Histogram256 h = compute_histogram(f, f.full_region());
  for (int c = 0; c < 3; ++c) {
    CHECK(h.bins[c][0] == 1);
    CHECK(h.bins[c][255] == 1);
  }
  CHECK(h.total == 2);
}

TEST_CASE("histogram matches the tally oracle on random frames") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Frame f = random_frame(rng(), 64, 64, trial % 3 == 0 ? 0.2 : 0.0);
    std::uniform_int_distribution<int> coord(0, 40);
    const int x0 = coord(rng), y0 = coord(rng);
    const Region r{x0, y0, x0 + 1 + coord(rng) % 23, y0 + 1 + coord(rng) % 23};
    const auto expected = tally(f, r);
    std::uint64_t expected_total = 0;
    for (int v = 0; v < 256; ++v) expected_total += expected[0][v];
    if (expected_total == 0) {
      CHECK_THROWS_AS(compute_histogram(f, r), StitchError);
      continue;
    }
    const Histogram256 h = compute_histogram(f, r);
    CHECK(h.total == expected_total);
    for (int c = 0; c < 3; ++c) {
      for (int v = 0; v < 256; ++v) CHECK(h.bins[c][v] == expected[c][v]);
    }
  }
}

TEST_CASE("histogram rejects empty and out-of-bounds regions") {
  const Frame f = constant_frame(8, 8, 1, 2, 3);
  CHECK_THROWS_AS(compute_histogram(f, Region{4, 4, 4, 6}), StitchError);
  CHECK_THROWS_AS(compute_histogram(f, Region{0, 0, 9, 8}), StitchError);
  Frame masked = Frame::with_mask(8, 8, 0, 0);  // everything invalid
  CHECK_THROWS_AS(compute_histogram(masked, masked.full_region()),
                  StitchError);
}

TEST_CASE("cdf closed forms and prefix-sum oracle") {
  Histogram256 h;
  h.bins[0][0] = h.bins[1][0] = h.bins[2][0] = 10;
  h.total = 10;
  const Cdf256 all_at_zero = cdf(h);
  for (int v = 0; v < 256; ++v) CHECK(all_at_zero.values[0][v] == 1.0);

  Histogram256 uniform;
  for (int c = 0; c < 3; ++c)
    for (int v = 0; v < 256; ++v) uniform.bins[c][v] = 4;
  uniform.total = 4 * 256;
  const Cdf256 u = cdf(uniform);
  for (int v = 0; v < 256; ++v) {
    CHECK(u.values[1][v] == doctest::Approx((v + 1) / 256.0).epsilon(1e-12));
  }
  CHECK(u.values[0][255] == 1.0);

  std::mt19937_64 rng(11);
  Histogram256 random_hist;
  std::uniform_int_distribution<int> count(0, 50);
  std::uint64_t total = 0;
  for (int v = 0; v < 256; ++v) {
    const int n = count(rng);
    for (int c = 0; c < 3; ++c) random_hist.bins[c][v] = n;
    total += n;
  }
  random_hist.total = total;
  const Cdf256 r = cdf(random_hist);
  for (int c = 0; c < 3; ++c) {
    double run = 0.0;
    for (int v = 0; v < 256; ++v) {
      run += random_hist.bins[c][v];
      CHECK(r.values[c][v] ==
            doctest::Approx(run / static_cast<double>(total)).epsilon(1e-12));
      if (v > 0) CHECK(r.values[c][v] >= r.values[c][v - 1]);
    }
    CHECK(r.values[c][255] == 1.0);
  }

  Histogram256 empty;
  CHECK_THROWS_AS(cdf(empty), StitchError);
}

TEST_CASE("bilinear sampling") {
  Frame f(2, 1);
  f.data = {0, 0, 0, 100, 100, 100};

  SUBCASE("integer coordinates reproduce the raster") {
    const BilinearSample s = sample_bilinear(f, 1.0, 0.0);
    CHECK(s.valid);
    CHECK(s.rgb(0) == 100.0f);
  }
  SUBCASE("midpoint blends neighbors") {
    const BilinearSample s = sample_bilinear(f, 0.5, 0.0);
    CHECK(s.valid);
    CHECK(s.rgb(0) == doctest::Approx(50.0f));
  }
  SUBCASE("fully outside is invalid") {
    CHECK_FALSE(sample_bilinear(f, -5.0, 0.0).valid);
    CHECK_FALSE(sample_bilinear(f, 0.0, 3.0).valid);
  }
  SUBCASE("partial neighborhoods renormalize") {
    // x = -0.25 leaves only the x=0 neighbor with weight.
    const BilinearSample s = sample_bilinear(f, -0.25, 0.0);
    CHECK(s.valid);
    CHECK(s.rgb(0) == doctest::Approx(0.0f));
  }
  SUBCASE("masked neighbors drop out") {
    Frame m = Frame::with_mask(2, 1);
    m.data = {10, 10, 10, 200, 200, 200};
    m.set_valid(1, 0, false);
    const BilinearSample s = sample_bilinear(m, 0.5, 0.0);
    CHECK(s.valid);
    CHECK(s.rgb(0) == doctest::Approx(10.0f));
    m.set_valid(0, 0, false);
    CHECK_FALSE(sample_bilinear(m, 0.5, 0.0).valid);
  }
}

TEST_CASE("bilinear at integer coordinates is bit-exact on random frames") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Frame f = random_frame(rng(), 17, 13);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const BilinearSample s = sample_bilinear(f, x, y);
        REQUIRE(s.valid);
        const std::uint8_t* p = f.px(x, y);
        CHECK(s.rgb(0) == static_cast<float>(p[0]));
        CHECK(s.rgb(1) == static_cast<float>(p[1]));
        CHECK(s.rgb(2) == static_cast<float>(p[2]));
      }
    }
  }
}

TEST_CASE("integral image box sums equal brute force for 1000 random boxes") {
  const Frame f = random_frame(99, 53, 41);
  const IntegralImage ii(f);

  // The integral is built on quantized luma, so tally the same plane.
  Eigen::Array<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> luma(41, 53);
  for (int y = 0; y < 41; ++y) {
    for (int x = 0; x < 53; ++x) {
      const std::uint8_t* p = f.px(x, y);
      luma(y, x) = quantize_channel(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cx(0, 53), cy(0, 41);
  for (int trial = 0; trial < 1000; ++trial) {
    int x0 = cx(rng), x1 = cx(rng), y0 = cy(rng), y1 = cy(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    std::uint64_t sum = 0, sq = 0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        sum += luma(y, x);
        sq += luma(y, x) * luma(y, x);
      }
    }
    CHECK(ii.box_sum(x0, y0, x1, y1) == sum);
    CHECK(ii.box_sum_squares(x0, y0, x1, y1) == sq);
  }
}

TEST_CASE("ppm round-trips bit-exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "stitch_io_test";
  std::filesystem::create_directories(dir);
  const Frame f = random_frame(3, 31, 17);
  write_ppm(dir / "a.ppm", f);
  const Frame g = read_ppm(dir / "a.ppm");
  CHECK(g.width == f.width);
  CHECK(g.height == f.height);
  CHECK(g.data == f.data);
}

TEST_CASE("png round-trips pixels and mask") {
  const auto dir = std::filesystem::temp_directory_path() / "stitch_io_test";
  std::filesystem::create_directories(dir);

  Frame f = random_frame(4, 23, 19);
  write_png(dir / "plain.png", f);
  const Frame g = read_png(dir / "plain.png");
  CHECK(g.data == f.data);
  CHECK_FALSE(g.has_mask());

  Frame masked = random_frame(5, 23, 19, 0.3);
  write_png(dir / "masked.png", masked);
  const Frame h = read_png(dir / "masked.png");
  REQUIRE(h.has_mask());
  CHECK(h.mask == masked.mask);
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      if (!masked.valid_at(x, y)) continue;
      CHECK(h.px(x, y)[0] == masked.px(x, y)[0]);
    }
  }
}

TEST_CASE("sequence naming and listing") {
  CHECK(sequence_name("pano", 3) == "pano_000003.png");
  const auto dir = std::filesystem::temp_directory_path() / "stitch_seq_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (int i : {2, 0, 1}) {
    write_png(dir / sequence_name("frame", i), constant_frame(4, 4, 1, 2, 3));
  }
  const auto files = list_sequence(dir);
  REQUIRE(files.size() == 3);
  CHECK(files[0].filename() == "frame_000000.png");
  CHECK(files[2].filename() == "frame_000002.png");
}
