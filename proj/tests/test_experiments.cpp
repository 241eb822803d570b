#include <gtest/gtest.h>

#include <sstream>

#include "mcpert/experiments.hpp"

namespace {

using namespace mcpert;

std::string to_csv(const Table& t) {
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

TEST(Csv, FormattingAndRoundTrip) {
  EXPECT_EQ(format_number(kInfinity), "inf");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  Table t{{"a", "b"}, {{0.1, kInfinity}, {1.0 / 3.0, -2.5e-300}}};
  std::istringstream in(to_csv(t));
  const Table back = read_csv(in);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), Error);
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(read_csv(ragged), Error);
  EXPECT_THROW(t.column("missing"), Error);
}

TEST(ThetaGrid, Validation) {
  EXPECT_EQ((ThetaGrid{0.0, 1.0, 3}.points()), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_THROW((ThetaGrid{0.5, 0.2, 3}.points()), Error);
  EXPECT_THROW((ThetaGrid{0.0, 1.5, 3}.points()), Error);
  EXPECT_THROW((ThetaGrid{0.0, 1.0, 1}.points()), Error);
}

TEST(Sweep, DeterministicAndValid) {
  SweepConfig config;
  config.model.n = 12;
  config.model.seed = 5;
  config.grid = {0.01, 1.0, 25};
  const Table a = run_sweep(config);
  EXPECT_EQ(to_csv(a), to_csv(run_sweep(config)));

  const auto truth = a.values("true_diff");
  const auto one = a.values("true_diff_one");
  const auto inf = a.values("true_diff_inf");
  for (const std::string name : {"cnb_k3", "cnb_k6", "cnb_update", "ssb", "db", "seb_1", "seb_2", "seb_3", "cnb_norm"}) {
    const auto values = a.values(name);
    const auto ok = a.values(name + "_ok");
    const auto& target = name == "cnb_k3" ? one : (name == "cnb_k6" || name == "cnb_update") ? inf : truth;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (ok[i] == 1.0) {
        EXPECT_GE(values[i], target[i] - 1e-10) << name;
      } else {
        EXPECT_EQ(values[i], kInfinity) << name;
      }
    }
  }
}

TEST(Sweep, HeaderLayout) {
  SweepConfig config;
  config.model.n = 5;
  config.grid = {0.1, 0.2, 2};
  const Table t = run_sweep(config);
  const std::vector<std::string> leading{"theta",      "true_diff", "cnb_k3",     "cnb_k6",  "cnb_update", "ssb",
                                         "db",         "seb_1",     "seb_2",      "seb_3",   "eta_cnb_k6", "eta_ssb",
                                         "eta_db",     "eta_seb_1", "eta_seb_2",  "eta_seb_3"};
  ASSERT_GE(t.header.size(), leading.size());
  EXPECT_TRUE(std::equal(leading.begin(), leading.end(), t.header.begin()));
}

TEST(Sweep, TwoStateMatchesClosedFormOracles) {
  SweepConfig config;
  config.model.kind = "two-state";
  config.model.p = 0.3;
  config.model.q = 0.2;
  config.model.p_tilde = 0.35;
  config.model.q_tilde = 0.15;
  config.norm = NormKind::v(1.0);
  config.orders = {0, 1};
  config.grid = {0.01, 0.5, 20};
  const Table t = run_sweep(config);
  const TwoStateParams params{0.3, 0.2, 0.35, 0.15};
  for (const auto& row : t.rows) {
    const double theta = row[t.column("theta")];
    const auto o = two_state_bound_oracles(params, 1.0, theta);
    EXPECT_NEAR(row[t.column("cnb_norm")], o.cnb.value, 1e-12);
    EXPECT_NEAR(row[t.column("seb_0")], o.seb0.value, 1e-12);
    EXPECT_NEAR(row[t.column("seb_1")], o.seb1.value, 1e-12);
    ASSERT_EQ(row[t.column("db_ok")] == 1.0, o.db.applicable);
    if (o.db.applicable) {
      EXPECT_NEAR(row[t.column("db")], o.db.value, 1e-12);
    }
    ASSERT_EQ(row[t.column("ssb_ok")] == 1.0, o.ssb.applicable);
    if (o.ssb.applicable) {
      EXPECT_NEAR(row[t.column("ssb")], o.ssb.value, 1e-12);
    }
  }
}

TEST(Sweep, RandomFortyStatesSsbInapplicable) {
  SweepConfig config;
  config.grid = {0.01, 1.0, 20};
  const Table t = run_sweep(config);
  for (double ok : t.values("ssb_ok")) EXPECT_EQ(ok, 0.0);
  for (double v : t.values("ssb")) EXPECT_EQ(v, kInfinity);
}

TEST(Sweep, SmallThetaBoundsAgreeExceptCnb) {
  SweepConfig config;
  config.grid = {1e-4, 1e-3, 2};
  const Table t = run_sweep(config);
  const auto& row = t.rows.front();
  const double db = row[t.column("db")];
  for (const std::string name : {"seb_1", "seb_2", "seb_3"}) {
    EXPECT_LE(std::abs(row[t.column(name)] - db) / db, 0.1) << name;
  }
  EXPECT_GT(row[t.column("cnb_k6")], 1.1 * db);
}

TEST(Sweep, RejectsUnknownModel) {
  SweepConfig config;
  config.model.kind = "torus";
  EXPECT_THROW(run_sweep(config), Error);
}

TEST(QueueSsb, DominatesTruncatedTruth) {
  QueueSsbConfig config;
  config.grid = {0.0, 0.01, 21};
  config.alpha_grid = 201;
  const Table t = run_queue_ssb(config);
  const auto bound = t.values("ssb_bound");
  const auto truth = t.values("true_value");
  EXPECT_EQ(bound.front(), 0.0);
  EXPECT_EQ(truth.front(), 0.0);
  for (std::size_t i = 0; i < bound.size(); ++i) {
    EXPECT_TRUE(std::isfinite(bound[i]));
    EXPECT_GE(bound[i], truth[i]);
  }
  for (double alpha : t.values("alpha_opt")) {
    EXPECT_GE(alpha, 1.0);
    EXPECT_LE(alpha, 1.8);
  }
}

TEST(QueueSeb, OrdersAndAdmissibility) {
  QueueSebConfig config;
  config.steps = 10;
  const Table t = run_queue_seb(config);
  const double x = t.rows.front().back();
  EXPECT_LT(config.theta0 * x, 1.0);
  const auto e1 = t.values("rel_err_seb_1");
  const auto e2 = t.values("rel_err_seb_2");
  const auto e3 = t.values("rel_err_seb_3");
  for (std::size_t i = 0; i < e1.size(); ++i) {
    EXPECT_GE(e3[i], 0.0);
    EXPECT_LT(e3[i], e2[i]);
    EXPECT_LT(e2[i], e1[i]);
  }
  config.theta0 = 1.0;
  try {
    run_queue_seb(config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
}

TEST(ModelDump, RingAndStarTabooNorms) {
  ModelConfig ring;
  ring.kind = "ring";
  ring.n = 3;
  ring.b = 0.5;
  std::ostringstream out;
  dump_model(out, ring, NormKind::one());
  EXPECT_NE(out.str().find("taboo_first_column 1\n"), std::string::npos);
  EXPECT_NE(out.str().find("taboo_first_row 1\n"), std::string::npos);

  ModelConfig star;
  star.kind = "star";
  star.n = 5;
  star.beta = 0.4;
  star.gamma = 0.5;
  std::ostringstream s;
  dump_model(s, star, NormKind::one());
  EXPECT_NE(s.str().find("taboo_first_column " + format_number(0.5 + 0.4 / 4.0)), std::string::npos);
}

TEST(Stability, Certificates) {
  ModelConfig queue;
  queue.kind = "mg1";
  EXPECT_NEAR(stability_certificate(queue, NormKind::v(1.0), 0).theta_bound, 0.5, 1e-9);

  ModelConfig ring;
  ring.kind = "ring";
  try {
    stability_certificate(ring, NormKind::one(), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCertificate);
  }

  ModelConfig two;
  two.kind = "two-state";
  two.p = 0.3;
  two.q = 0.2;
  two.p_tilde = 0.4;
  two.q_tilde = 0.1;
  EXPECT_NEAR(stability_certificate(two, NormKind::v(1.0), 0).theta_bound, 0.2 / 0.2, 1e-14);
}

TEST(Svg, RendersPolylinesAndRejectsBadInput) {
  Table t{{"theta", "a", "b"}, {{0.1, 1.0, 2.0}, {0.2, 2.0, kInfinity}, {0.3, 3.0, 1.0}}};
  const std::string svg = render_svg(t, "theta", {"a", "b"}, false, true);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t count = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_THROW(render_svg(t, "theta", {"c"}, false, false), Error);
  EXPECT_THROW(render_svg(Table{{"theta"}, {}}, "theta", {"theta"}, false, false), Error);
}

}  // namespace
