/* Copyright 2026 The FlowHPC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <fstream>

#include "doctest.h"
#include "flowhpc/error.hpp"
#include "flowhpc/tile_io.hpp"
#include "test_util.hpp"

using namespace flowhpc;

TEST_SUITE("tiles") {

TEST_CASE("square tiles round trip bit for bit") {
  testutil::TempDir dir("tiles_square");
  for (int seed = 0; seed < 3; ++seed) {
    Tensor t = seed == 0   ? testutil::random_f32(Shape::matrix(8, 8), 1)
               : seed == 1 ? testutil::random_f64(Shape::matrix(5, 5), 2)
                           : testutil::random_c128(Shape::matrix(4, 4), 3);
    const std::string path = dir.sub("t" + std::to_string(seed) + ".til");
    write_square_tile(path, 2, 7, t);
    CHECK(read_square_tile(path, 2, 7).same_bits(t));
  }
}

TEST_CASE("rect tiles carry row blocks and vectors") {
  testutil::TempDir dir("tiles_rect");
  Tensor block = testutil::random_f64(Shape::matrix(3, 10), 4);
  write_rect_tile(dir.sub("blk.til"), 1, 0, block);
  CHECK(read_rect_tile(dir.sub("blk.til"), 1, 0).same_bits(block));

  Tensor vec = testutil::random_f64(Shape::vector(12), 5);
  write_rect_tile(dir.sub("vec.til"), 3, 0, vec);
  Tensor back = read_vector_tile(dir.sub("vec.til"), 3);
  CHECK(back.shape().rank() == 1);
  CHECK(back.elem_count() == 12);
  CHECK(std::equal(back.f64().begin(), back.f64().end(), vec.f64().begin()));
}

TEST_CASE("coordinate mismatches are refused") {
  testutil::TempDir dir("tiles_coord");
  Tensor t = testutil::random_f32(Shape::matrix(4, 4), 6);
  write_square_tile(dir.sub("t.til"), 1, 2, t);
  CHECK_THROWS_AS((void)read_square_tile(dir.sub("t.til"), 1, 3), FlowError);
  CHECK_THROWS_AS((void)read_square_tile(dir.sub("t.til"), 0, 2), FlowError);
}

TEST_CASE("corrupted magic bytes are refused") {
  testutil::TempDir dir("tiles_magic");
  Tensor t = testutil::random_f32(Shape::matrix(4, 4), 7);
  write_square_tile(dir.sub("t.til"), 0, 0, t);
  {
    std::fstream f(dir.sub("t.til"), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS((void)read_square_tile(dir.sub("t.til"), 0, 0), FlowError);
}

TEST_CASE("a truncated tile file is refused") {
  testutil::TempDir dir("tiles_trunc");
  Tensor t = testutil::random_f64(Shape::matrix(6, 6), 8);
  const std::string path = dir.sub("t.til");
  write_square_tile(path, 0, 0, t);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
  CHECK_THROWS_AS((void)read_square_tile(path, 0, 0), FlowError);
}

TEST_CASE("missing files give a dedicated error") {
  testutil::TempDir dir("tiles_missing");
  CHECK_THROWS_AS((void)read_square_tile(dir.sub("absent.til"), 0, 0), FlowError);
}

TEST_CASE("tile paths sort in row then column order") {
  CHECK(tile_path("d", "A", 3, 10) == "d/A_0003_0010.til");
  CHECK(vector_tile_path("d", "x", 7) == "d/x_0007.til");
  // Zero padding keeps lexicographic order equal to numeric order.
  CHECK(tile_path("d", "A", 2, 0) < tile_path("d", "A", 10, 0));
}

TEST_CASE("the audit counts reads and writes by basename") {
  testutil::TempDir dir("tiles_audit");
  TileAudit audit;
  Tensor t = testutil::random_f32(Shape::matrix(2, 2), 9);
  write_square_tile(dir.sub("a.til"), 0, 0, t, &audit);
  (void)read_square_tile(dir.sub("a.til"), 0, 0, &audit);
  (void)read_square_tile(dir.sub("a.til"), 0, 0, &audit);
  CHECK(audit.writes().at("a.til") == 1);
  CHECK(audit.reads().at("a.til") == 2);
  CHECK(audit.reads().count("b.til") == 0);
}

}  // TEST_SUITE
