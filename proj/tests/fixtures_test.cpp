#include <gtest/gtest.h>

#include "fixture_gen.hpp"
#include "scratch.hpp"

using namespace modgate;

TEST(Fixtures, CommittedFilesMatchGenerator) {
  ScratchDir dir("fixtures");
  auto written = fixtures::write_all(MODGATE_DATA_DIR, dir.path());
  EXPECT_EQ(written.size(), 13u);
  for (const auto& rel : written) {
    EXPECT_EQ(read_file(dir / rel), read_file(std::filesystem::path(MODGATE_FIXTURES_DIR) / rel)) << rel;
  }
}
