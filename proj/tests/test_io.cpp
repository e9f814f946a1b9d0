#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <hyplab/io.hpp>

using namespace hyplab;

TEST(Format, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt17(1.0), "1");
  for (double v : {M_PI, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)}) EXPECT_EQ(std::stod(fmt17(v)), v);
  EXPECT_EQ(hex64(0xdeadbeefULL), "00000000deadbeef");
}

TEST(Config, ParsesSectionsAndLists) {
  auto c = RunConfig::from_string(
      "[model]\nn = 4\nsigma = 0.25\nlambda = 1.5\n[grids]\npreset = coarse\n[experiment]\ntimes = 0.1, 1,10\n");
  ModelParams p = c.model();
  EXPECT_EQ(p.n, 4);
  EXPECT_EQ(p.sigma, 0.25);
  EXPECT_EQ(p.lambda, 1.5);
  EXPECT_EQ(p.gamma, 2.0);
  EXPECT_EQ(c.get_list("experiment.times", {}), (std::vector<double>{0.1, 1.0, 10.0}));
  EXPECT_EQ(c.get_list("experiment.absent", {7.0}), (std::vector<double>{7.0}));
  GridSpec g = c.grids();
  EXPECT_EQ(g.rNodes, GridSpec::coarse().rNodes);
  EXPECT_TRUE(c.has("grids.preset"));
  EXPECT_FALSE(c.has("grids.rMax"));
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(RunConfig::from_string("[model]\nn = three\n").model(), DomainError);
  EXPECT_THROW(RunConfig::from_string("[model]\nsigma = 1.0\n").model(), DomainError);
  EXPECT_THROW(RunConfig::from_string("[model]\nlambda = 1.01\n").model(), DomainError);
  EXPECT_THROW(RunConfig::from_string("[model]\ngamma = 1\n").model(), DomainError);
  EXPECT_THROW(RunConfig::from_string("[model]\nbeta = 0\n").model(), DomainError);
  EXPECT_THROW(RunConfig::from_string("[grids]\nrNodes = 1\n").grids(), DomainError);
  EXPECT_THROW(RunConfig::from_string("[experiment]\ntimes = 1, x\n").get_list("experiment.times", {}), DomainError);
  EXPECT_THROW(RunConfig::from_string("[model\nn = 3\n"), DomainError);
  EXPECT_THROW(RunConfig::from_file("/nonexistent/hyplab.ini"), DomainError);
}

TEST(Config, HashIsCanonical) {
  auto a = RunConfig::from_string("[model]\nn = 3\nsigma = 0.5\n[experiment]\nmode = scan\n");
  auto b = RunConfig::from_string("[experiment]\nmode = scan\n\n[model]\nsigma = 0.5\nn = 3\n");
  auto c = RunConfig::from_string("[model]\nn = 3\nsigma = 0.75\n[experiment]\nmode = scan\n");
  EXPECT_EQ(a.canonical(), "experiment.mode=scan\nmodel.n=3\nmodel.sigma=0.5\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(RunConfig().hash(), RunConfig::from_string("").hash());
}

TEST(Csv, HeaderAndRows) {
  std::ostringstream os;
  {
    CsvWriter w(os, {"a", "b", "c"}, 0x1234ULL, 42);
    w.cell("x").cell(0.1).cell(7LL);
    w.end_row();
    w.cell(std::numeric_limits<double>::infinity()).cell(-0.0).cell("");
    w.end_row();
  }
  EXPECT_EQ(os.str(), std::string("# hyplab ") + kVersion + " config=0000000000001234 seed=42\n" +
                          "a,b,c\nx,0.10000000000000001,7\ninf,-0,\n");
  EXPECT_EQ(provenance_header(1, 2, ""), std::string("hyplab ") + kVersion + " config=0000000000000001 seed=2\n");
}
