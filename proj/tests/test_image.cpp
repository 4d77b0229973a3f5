#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sebcomm/augment.hpp"
#include "sebcomm/errors.hpp"
#include "sebcomm/image.hpp"
#include "sebcomm/image_io.hpp"
#include "sebcomm/model.hpp"
#include "test_util.hpp"

using namespace sebcomm;
using testutil::TempDir;
using testutil::make_image;

namespace {

bool images_equal(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) return false;
  return a.pixels.data == b.pixels.data;
}

}  // namespace

TEST_CASE("reflect_index folds about the edges without repeating them") {
  CHECK(reflect_index(0, 5) == 0);
  CHECK(reflect_index(4, 5) == 4);
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(-2, 5) == 2);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(6, 5) == 2);
  // period 2n-2 folds
  CHECK(reflect_index(3, 3) == 1);
  CHECK(reflect_index(4, 3) == 0);
  CHECK(reflect_index(-1, 3) == 1);
  CHECK(reflect_index(-2, 3) == 2);
  CHECK(reflect_index(-3, 3) == 1);
  // single-pixel axis degenerates to replication
  for (int i = -3; i <= 3; ++i) CHECK(reflect_index(i, 1) == 0);
}

TEST_CASE("patchify cuts divisible images into a row-major grid") {
  Image img = make_image(256, 256, 11);
  PatchGrid grid = patchify(img, 32, 32);
  CHECK(grid.rows == 8);
  CHECK(grid.cols == 8);
  CHECK(grid.patch_count() == 64);
  CHECK(grid.patches.size() == 64);
  CHECK(grid.pad.top == 0);
  CHECK(grid.pad.left == 0);
  CHECK(grid.pad.bottom == 0);
  CHECK(grid.pad.right == 0);

  // patch (r,c) is the image block at (32r, 32c)
  const Tensor& p = grid.patches[1 * 8 + 3];
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        CHECK(p.at(c, y, x) == img.pixels.at(c, 32 + y, 96 + x));
}

TEST_CASE("patchify reflect-pads non-divisible images") {
  Image img = make_image(33, 33, 7);
  PatchGrid grid = patchify(img, 32, 32);
  CHECK(grid.rows == 2);
  CHECK(grid.cols == 2);
  CHECK(grid.patch_count() == 4);
  CHECK(grid.pad.top == 0);
  CHECK(grid.pad.left == 0);
  CHECK(grid.pad.bottom == 31);
  CHECK(grid.pad.right == 31);
  // padded row 33 reflects row 31
  CHECK(grid.patches[2].at(0, 1, 0) == img.pixels.at(0, 31, 0));
  CHECK(images_equal(depatchify(grid), img));
}

TEST_CASE("whole-image patch") {
  Image img = make_image(48, 40, 3);
  PatchGrid grid = patchify(img, 48, 40);
  CHECK(grid.patch_count() == 1);
  CHECK(grid.patches[0].data == img.pixels.data);
}

TEST_CASE("patchify rejects non-positive patch sizes") {
  Image img = make_image(8, 8, 1);
  CHECK_THROWS_AS(patchify(img, 0, 8), ParameterError);
  CHECK_THROWS_AS(patchify(img, 8, -1), ParameterError);
}

TEST_CASE("depatchify inverts patchify bit-exactly across random sizes") {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const int H = 1 + static_cast<int>(rng.uniform() * 40);
    const int W = 1 + static_cast<int>(rng.uniform() * 40);
    const int h = 1 + static_cast<int>(rng.uniform() * (H - 1 + 1));
    const int w = 1 + static_cast<int>(rng.uniform() * (W - 1 + 1));
    Image img = make_image(H, W, 1000 + static_cast<uint64_t>(t));
    PatchGrid grid = patchify(img, h, w);
    CHECK(grid.patch_count() == ((H + h - 1) / h) * ((W + w - 1) / w));
    Image back = depatchify(grid);
    REQUIRE(images_equal(back, img));
  }
}

TEST_CASE("depatchify of uniform patches tiles") {
  Image img = make_image(64, 64, 5);
  PatchGrid grid = patchify(img, 32, 32);
  for (auto& p : grid.patches) p = grid.patches[0];
  Image tiled = depatchify(grid);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        CHECK(tiled.pixels.at(c, y, x) == grid.patches[0].at(c, y % 32, x % 32));
}

TEST_CASE("depatchify rejects tampered grids") {
  Image img = make_image(64, 64, 5);
  PatchGrid grid = patchify(img, 32, 32);
  grid.rows = 3;
  CHECK_THROWS_AS(depatchify(grid), StructuralError);
  grid.rows = 2;
  grid.patches.pop_back();
  CHECK_THROWS_AS(depatchify(grid), StructuralError);
}

TEST_CASE("png round trip is exact on the 8-bit lattice") {
  TempDir tmp;
  Image img(16, 17);
  int k = 0;
  for (auto& v : img.pixels.data) v = static_cast<float>((k++ % 256) / 255.0);
  const std::string path = tmp.file("lattice.png");
  save_png(path, img);
  Image back = load_image(path);
  CHECK(images_equal(back, img));
}

TEST_CASE("all-black png loads as zeros") {
  TempDir tmp;
  Image img = testutil::constant_image(9, 6, 0.0f, 0.0f, 0.0f);
  const std::string path = tmp.file("black.png");
  save_png(path, img);
  Image back = load_image(path);
  for (float v : back.pixels.data) CHECK(v == 0.0f);
}

TEST_CASE("missing path raises an ingestion error and returns nothing") {
  TempDir tmp;
  CHECK_THROWS_AS(load_image(tmp.file("absent.png")), IngestError);
  std::vector<std::string> paths = {tmp.file("absent.png")};
  CHECK_THROWS_AS(load_images(paths), IngestError);
}

TEST_CASE("load_images preserves argument order") {
  TempDir tmp;
  Image a = testutil::constant_image(4, 4, 1.0f, 0.0f, 0.0f);
  Image b = testutil::constant_image(4, 4, 0.0f, 1.0f, 0.0f);
  save_png(tmp.file("a.png"), a);
  save_png(tmp.file("b.png"), b);
  ImageSet set = load_images({tmp.file("b.png"), tmp.file("a.png")});
  REQUIRE(set.size() == 2);
  CHECK(set.images[0].pixels.at(1, 0, 0) == 1.0f);
  CHECK(set.images[1].pixels.at(0, 0, 0) == 1.0f);
}

TEST_CASE("resize_bilinear with equal size copies exactly") {
  Image img = make_image(13, 21, 2);
  Image out = resize_bilinear(img, 13, 21);
  CHECK(images_equal(out, img));
}

TEST_CASE("augment emits the requested count and size") {
  Image img = make_image(64, 64, 8);
  auto out = augment(img, 16, 256, 256, 42);
  CHECK(out.size() == 16);
  for (const auto& im : out) {
    CHECK(im.height() == 256);
    CHECK(im.width() == 256);
  }
}

TEST_CASE("identity crop reproduces the input") {
  Image img = make_image(32, 32, 8);
  AugmentOptions opts;
  opts.scale_min = 1.0;
  opts.scale_max = 1.0;
  auto out = augment(img, 1, 32, 32, 7, opts);
  REQUIRE(out.size() == 1);
  CHECK(images_equal(out[0], img));
}

TEST_CASE("augment is deterministic in the seed") {
  Image img = make_image(48, 64, 8);
  auto a = augment(img, 5, 32, 32, 1234);
  auto b = augment(img, 5, 32, 32, 1234);
  auto c = augment(img, 5, 32, 32, 1235);
  REQUIRE(a.size() == b.size());
  bool all_eq = true, any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    all_eq = all_eq && images_equal(a[i], b[i]);
    any_diff = any_diff || !images_equal(a[i], c[i]);
  }
  CHECK(all_eq);
  CHECK(any_diff);
}

TEST_CASE("augment rejects outputs beyond the upscale ceiling") {
  Image img = make_image(16, 16, 8);
  CHECK_THROWS_AS(augment(img, 1, 16 * 8 + 1, 16, 0), ParameterError);
  CHECK_THROWS_AS(augment(img, 0, 16, 16, 0), ParameterError);
}

TEST_CASE("batch packing matches patchify ordering") {
  std::vector<Image> imgs = {make_image(32, 48, 1), make_image(32, 48, 2)};
  Tensor batch = images_to_batch(imgs);
  REQUIRE(batch.ndim() == 4);
  CHECK(batch.dim(0) == 2);
  CHECK(batch.dim(1) == 3);
  CHECK(batch.dim(2) == 32);
  CHECK(batch.dim(3) == 48);
  CHECK(batch.at(1, 2, 5, 7) == imgs[1].pixels.at(2, 5, 7));

  auto back = batch_to_images(batch);
  REQUIRE(back.size() == 2);
  CHECK(images_equal(back[0], imgs[0]));
  CHECK(images_equal(back[1], imgs[1]));

  // split_into_patches over the batch mirrors patchify per image
  Tensor tiles = split_into_patches(batch, 16);
  REQUIRE(tiles.ndim() == 4);
  CHECK(tiles.dim(0) == 2 * 2 * 3);
  PatchGrid g0 = patchify(imgs[0], 16, 16);
  for (int p = 0; p < 6; ++p)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          CHECK(tiles.at(p, c, y, x) == g0.patches[static_cast<size_t>(p)].at(c, y, x));
  Tensor merged = merge_from_patches(tiles, 2, 32, 48);
  CHECK(merged.data == batch.data);
}
