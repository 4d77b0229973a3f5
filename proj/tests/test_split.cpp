#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "sebcomm/errors.hpp"
#include "sebcomm/serialize.hpp"
#include "sebcomm/split.hpp"
#include "test_util.hpp"

using namespace sebcomm;
using testutil::TempDir;
using testutil::constant_image;
using testutil::make_image;

TEST_CASE("mean pool projector returns the channel means") {
  Image img(2, 2);
  float vals[3][4] = {{0.0f, 0.2f, 0.4f, 0.6f},
                      {1.0f, 1.0f, 0.0f, 0.0f},
                      {0.1f, 0.1f, 0.1f, 0.1f}};
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 4; ++i) img.pixels.at(c, i / 2, i % 2) = vals[c][i];
  MeanPoolProjector proj;
  Eigen::VectorXd e = proj.embed(img);
  REQUIRE(e.size() == 3);
  CHECK(e(0) == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(e(1) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(e(2) == doctest::Approx(0.1).epsilon(1e-7));
}

TEST_CASE("identical images embed identically") {
  ImageSet set;
  set.images.push_back(make_image(24, 24, 5));
  set.images.push_back(set.images[0]);
  ConvFeatureProjector proj(77);
  Eigen::MatrixXd E = embed_set(proj, set);
  REQUIRE(E.rows() == 2);
  REQUIRE(E.cols() == 16);
  CHECK((E.row(0) - E.row(1)).norm() == 0.0);
}

TEST_CASE("empty set embeds to a 0 x d matrix") {
  ImageSet set;
  MeanPoolProjector proj;
  Eigen::MatrixXd E = embed_set(proj, set);
  CHECK(E.rows() == 0);
  CHECK(E.cols() == 3);
}

TEST_CASE("split recovers a black/white partition exactly") {
  ImageSet set;
  for (int i = 0; i < 6; ++i)
    set.images.push_back(constant_image(16, 16, 0.02f * i, 0.02f * i, 0.02f * i));
  for (int i = 0; i < 6; ++i)
    set.images.push_back(constant_image(16, 16, 1.0f - 0.02f * i, 1.0f - 0.02f * i, 1.0f - 0.02f * i));
  MeanPoolProjector proj;
  SplitResult res = split(set, proj, 5, 321);
  CHECK(res.J == 2);
  CHECK(set.subset_count == 2);
  REQUIRE(res.labels.size() == 12);
  for (int i = 1; i < 6; ++i) {
    CHECK(res.labels[static_cast<size_t>(i)] == res.labels[0]);
    CHECK(res.labels[static_cast<size_t>(6 + i)] == res.labels[6]);
  }
  CHECK(res.labels[0] != res.labels[6]);
  CHECK(set.subset_labels == res.labels);
}

TEST_CASE("identical images collapse to a single subset") {
  ImageSet set;
  for (int i = 0; i < 5; ++i) set.images.push_back(constant_image(8, 8, 0.5f, 0.5f, 0.5f));
  MeanPoolProjector proj;
  SplitResult res = split(set, proj, 4, 1);
  CHECK(res.J == 1);
  for (int l : res.labels) CHECK(l == 0);
}

TEST_CASE("J_max of one forces a single subset") {
  ImageSet set;
  set.images.push_back(constant_image(8, 8, 0.0f, 0.0f, 0.0f));
  set.images.push_back(constant_image(8, 8, 1.0f, 1.0f, 1.0f));
  MeanPoolProjector proj;
  SplitResult res = split(set, proj, 1, 0);
  CHECK(res.J == 1);
  CHECK(res.inertia_curve.size() == 1);
}

TEST_CASE("split is deterministic and validates arguments") {
  ImageSet set;
  for (int i = 0; i < 9; ++i) set.images.push_back(make_image(12, 12, 40 + static_cast<uint64_t>(i)));
  ConvFeatureProjector proj(7);
  ImageSet set2 = set;
  SplitResult a = split(set, proj, 4, 99);
  SplitResult b = split(set2, proj, 4, 99);
  CHECK(a.J == b.J);
  CHECK(a.labels == b.labels);

  ImageSet empty;
  CHECK_THROWS_AS(split(empty, proj, 2, 0), ParameterError);
  CHECK_THROWS_AS(split(set, proj, 0, 0), ParameterError);
}

TEST_CASE("inertia curve is non-increasing in J") {
  ImageSet set;
  for (int i = 0; i < 10; ++i) set.images.push_back(make_image(10, 10, 60 + static_cast<uint64_t>(i)));
  MeanPoolProjector proj;
  SplitResult res = split(set, proj, 6, 13);
  REQUIRE(res.inertia_curve.size() >= 2);
  for (size_t i = 1; i < res.inertia_curve.size(); ++i)
    CHECK(res.inertia_curve[i].second <= res.inertia_curve[i - 1].second + 1e-9);
}

TEST_CASE("file-backed embeddings round trip and enforce row counts") {
  TempDir tmp;
  Eigen::MatrixXd rows(3, 4);
  rows << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const std::string path = tmp.file("emb.txt");
  write_embeddings(path, rows);

  FileEmbeddingProjector proj(path);
  CHECK(proj.loaded());
  CHECK(proj.dim() == 4);

  ImageSet set;
  for (int i = 0; i < 3; ++i) set.images.push_back(constant_image(4, 4, 0, 0, 0));
  Eigen::MatrixXd back = proj.embed_set(set);
  CHECK((back - rows).norm() == 0.0);

  CHECK_THROWS_AS(proj.embed(set.images[0]), StateError);

  set.images.push_back(constant_image(4, 4, 0, 0, 0));
  CHECK_THROWS_AS(proj.embed_set(set), IncompatError);

  FileEmbeddingProjector fresh;
  CHECK_THROWS_AS(fresh.embed_set(set), StateError);
  CHECK_THROWS_AS(FileEmbeddingProjector(tmp.file("missing.txt")), IngestError);

  std::ofstream bad(tmp.file("bad.txt"));
  bad << "2 3\n1 2 3\n4 5\n";
  bad.close();
  CHECK_THROWS_AS(FileEmbeddingProjector(tmp.file("bad.txt")), IngestError);
}
