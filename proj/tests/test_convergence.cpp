#include <gtest/gtest.h>

#include "polarquad/convergence.hpp"

using namespace polarquad;

namespace {

const ConvergenceReport& small_study() {
  static const ConvergenceReport report =
      run_convergence({{"sphere-0", sphere_mesh(0)}, {"sphere-1", sphere_mesh(1)}}, PointSource{});
  return report;
}

}  // namespace

TEST(Convergence, RecordsAndFits) {
  const ConvergenceReport& r = small_study();
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.records[0].variant, "quadratic");
  EXPECT_EQ(r.records[1].variant, "linear");
  EXPECT_EQ(r.records[0].P, 20u);
  EXPECT_EQ(r.records[0].N, 42u);
  EXPECT_EQ(r.records[1].P, 120u);
  EXPECT_EQ(r.records[1].N, 62u);
  EXPECT_EQ(r.records[2].P, 80u);
  for (const auto& rec : r.records) {
    EXPECT_GT(rec.rms, 0.0);
    EXPECT_LT(rec.residual, 1e-10);
    EXPECT_GT(rec.rcond, 1e-12);
  }
  EXPECT_LT(r.records[2].rms, r.records[0].rms);
  EXPECT_LT(r.records[3].rms, r.records[1].rms);
  ASSERT_NE(r.fit("quadratic"), nullptr);
  ASSERT_NE(r.fit("linear"), nullptr);
  EXPECT_EQ(r.fit("cubic"), nullptr);
  // Two points: the fit passes through both.
  const PowerLaw& f = r.fit("quadratic")->vs_P;
  EXPECT_NEAR(f.coefficient * std::pow(20.0, f.exponent), r.records[0].rms, 1e-12 * r.records[0].rms);
  EXPECT_LT(f.exponent, 0.0);
}

TEST(Convergence, SingleMeshHasNoFit) {
  const ConvergenceReport r = run_convergence({{"sphere-0", sphere_mesh(0)}}, PointSource{}, {}, false);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_TRUE(r.fits.empty());
  EXPECT_EQ(r.source, PointSource{}.position);
}

TEST(Convergence, ProgressCallbackSeesEveryRecord) {
  int calls = 0;
  run_convergence({{"a", sphere_mesh(0)}}, PointSource{}, {}, true, [&](const ConvergenceRecord&) { ++calls; });
  EXPECT_EQ(calls, 2);
}

TEST(Convergence, JsonRoundTrip) {
  const ConvergenceReport& r = small_study();
  const nlohmann::json j = nlohmann::json::parse(to_json(r).dump());
  const ConvergenceReport back = report_from_json(j);
  EXPECT_EQ(back.source, r.source);
  ASSERT_EQ(back.records.size(), r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(back.records[i].variant, r.records[i].variant);
    EXPECT_EQ(back.records[i].mesh, r.records[i].mesh);
    EXPECT_EQ(back.records[i].P, r.records[i].P);
    EXPECT_EQ(back.records[i].N, r.records[i].N);
    EXPECT_EQ(back.records[i].rms, r.records[i].rms);
  }
  ASSERT_EQ(back.fits.size(), r.fits.size());
  EXPECT_EQ(back.fits[0].vs_P.exponent, r.fits[0].vs_P.exponent);
  EXPECT_EQ(back.fits[1].vs_N.coefficient, r.fits[1].vs_N.coefficient);
}

TEST(Convergence, JsonErrors) {
  nlohmann::json j = to_json(small_study());
  j["records"][0].erase("rms_error");
  EXPECT_THROW(report_from_json(j), ValidationError);
  j = to_json(small_study());
  j["records"][0]["P"] = "twenty";
  EXPECT_THROW(report_from_json(j), ValidationError);
  EXPECT_THROW(report_from_json(nlohmann::json::object()), ValidationError);
}

TEST(Convergence, TableLists) {
  const std::string t = format_table(small_study());
  EXPECT_NE(t.find("rms_error"), std::string::npos);
  EXPECT_NE(t.find("sphere-1"), std::string::npos);
  EXPECT_NE(t.find("fit quadratic"), std::string::npos);
  EXPECT_NE(t.find("fit linear"), std::string::npos);
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 1 + 4 + 2);
}
