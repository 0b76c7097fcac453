#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "quadsim/control_fuzzy.hpp"

using namespace quadsim;
namespace fs = std::filesystem;

namespace {

TrainingDataset grid_dataset(double lo, double hi, int n,
                             double (*law)(double, double)) {
  TrainingDataset data;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double e = lo + (hi - lo) * i / (n - 1);
      const double r = lo + (hi - lo) * j / (n - 1);
      data.rows.push_back({e, r, law(e, r)});
    }
  }
  return data;
}

double sse_on(const SugenoFis& fis, const TrainingDataset& data) {
  double sse = 0.0;
  for (const TrainingSample& row : data.rows) {
    const double err = fis.evaluate(row.error, row.error_rate) - row.target;
    sse += err * err;
  }
  return sse;
}

// Brute-force Sugeno evaluation straight from the definition.
double reference_eval(const SugenoFis& fis, double x, double y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fis.input1_mfs.size(); ++i) {
    for (std::size_t j = 0; j < fis.input2_mfs.size(); ++j) {
      const double w = fis.input1_mfs[i].eval(x) * fis.input2_mfs[j].eval(y);
      const RuleConsequent& c = fis.consequents[i * fis.input2_mfs.size() + j];
      num += w * (c.p * x + c.q * y + c.r);
      den += w;
    }
  }
  return num / den;
}

SugenoFis random_small_fis(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> width(0.3, 1.2);
  std::uniform_real_distribution<double> shape(1.5, 3.0);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);

  SugenoFis fis;
  fis.input1_min = -2.0;
  fis.input1_max = 2.0;
  fis.input2_min = -1.0;
  fis.input2_max = 1.0;
  for (int k = 0; k < 5; ++k) {
    fis.input1_mfs.push_back({width(rng), shape(rng), -2.0 + k * 1.0});
    fis.input2_mfs.push_back({width(rng) * 0.5, shape(rng), -1.0 + k * 0.5});
  }
  for (int k = 0; k < 25; ++k) fis.consequents.push_back({coef(rng), coef(rng), coef(rng)});
  return fis;
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "quadsim_fuzzy_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("control_fuzzy") {

TEST_CASE("bell membership hits one at the center and half at the shoulders") {
  const BellMf mf{0.7, 2.0, 1.3};
  CHECK(mf.eval(1.3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mf.eval(1.3 + 0.7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mf.eval(1.3 - 0.7) == doctest::Approx(0.5).epsilon(1e-12));

  const BellMf steep{0.7, 4.0, 1.3};
  CHECK(steep.eval(1.3 + 1.4) < mf.eval(1.3 + 1.4));
  CHECK(steep.eval(1.3 + 0.35) > mf.eval(1.3 + 0.35));
}

TEST_CASE("inference matches the brute force weighted average") {
  const SugenoFis fis = random_small_fis(3);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> x(-2.0, 2.0), y(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double xe = x(rng), ye = y(rng);
    CHECK(fis.evaluate(xe, ye) == doctest::Approx(reference_eval(fis, xe, ye)).epsilon(1e-12));
  }
}

TEST_CASE("identical constant consequents collapse to that constant") {
  SugenoFis fis = random_small_fis(5);
  for (RuleConsequent& c : fis.consequents) c = {0.0, 0.0, 0.7};
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> x(-2.0, 2.0), y(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    CHECK(fis.evaluate(x(rng), y(rng)) == doctest::Approx(0.7).epsilon(1e-12));
  }
}

TEST_CASE("a single rule reduces to its linear consequent") {
  SugenoFis fis;
  fis.input1_mfs = {{1.0, 2.0, 0.0}};
  fis.input2_mfs = {{1.0, 2.0, 0.0}};
  fis.consequents = {{1.5, -0.5, 0.25}};
  fis.input1_min = -1.0;
  fis.input1_max = 1.0;
  fis.input2_min = -1.0;
  fis.input2_max = 1.0;
  CHECK(fis.evaluate(0.4, -0.2) == doctest::Approx(1.5 * 0.4 - 0.5 * -0.2 + 0.25).epsilon(1e-14));
}

TEST_CASE("normalized firing strengths sum to one") {
  const SugenoFis fis = random_small_fis(8);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> x(-2.0, 2.0), y(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> w = rule_firing(fis, x(rng), y(rng));
    REQUIRE(w.size() == 25);
    double total = 0.0;
    for (double v : w) {
      CHECK(v >= 0.0);
      total += v;
    }
    REQUIRE(total > 1e-12);
    double normalized = 0.0;
    for (double v : w) normalized += v / total;
    CHECK(normalized == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("output stays within the rule consequent envelope") {
  const SugenoFis fis = random_small_fis(12);
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> x(-2.0, 2.0), y(-1.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const double xe = x(rng), ye = y(rng);
    double lo = 1e300, hi = -1e300;
    for (const RuleConsequent& c : fis.consequents) {
      const double f = c.p * xe + c.q * ye + c.r;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    const double out = fis.evaluate(xe, ye);
    CHECK(out >= lo - 1e-12);
    CHECK(out <= hi + 1e-12);
  }
}

TEST_CASE("vanishing total firing strength is rejected") {
  SugenoFis fis = random_small_fis(14);
  for (BellMf& mf : fis.input1_mfs) mf.width = 1e-3;
  for (BellMf& mf : fis.input2_mfs) mf.width = 1e-3;
  CHECK_THROWS_AS(fis.evaluate(-1e3, 1e3), DegenerateFiring);
}

TEST_CASE("initialization spreads five bells across the data span") {
  TrainingDataset data;
  data.rows.push_back({-1.0, -1.0, 0.0});
  data.rows.push_back({1.0, 1.0, 0.0});
  data.rows.push_back({0.25, -0.5, 0.0});
  const SugenoFis fis = anfis_init(data);
  REQUIRE(fis.input1_mfs.size() == 5);
  REQUIRE(fis.input2_mfs.size() == 5);
  REQUIRE(fis.consequents.size() == 25);
  const double want_centers[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int k = 0; k < 5; ++k) {
    CHECK(fis.input1_mfs[k].center == doctest::Approx(want_centers[k]).epsilon(1e-12));
    CHECK(fis.input1_mfs[k].width == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fis.input1_mfs[k].shape == doctest::Approx(2.0).epsilon(1e-12));
  }
  for (const RuleConsequent& c : fis.consequents) {
    CHECK(c.p == 0.0);
    CHECK(c.q == 0.0);
    CHECK(c.r == 0.0);
  }
}

TEST_CASE("initialization rejects degenerate input columns") {
  TrainingDataset flat;
  flat.rows.push_back({0.5, -1.0, 0.0});
  flat.rows.push_back({0.5, 1.0, 0.0});
  CHECK_THROWS_AS(anfis_init(flat), InvalidRange);
  CHECK_THROWS_AS(anfis_init(TrainingDataset{}), InvalidRange);
}

TEST_CASE("a linear teacher is absorbed in one epoch") {
  const TrainingDataset data =
      grid_dataset(-1.0, 1.0, 25, [](double e, double r) { return 2.0 * e + 3.0 * r; });
  SugenoFis fis = anfis_init(data);
  TrainConfig config;
  config.epochs = 1;
  const TrainReport report = anfis_train(fis, data, config);
  REQUIRE(report.rmse_history.size() == 1);
  CHECK(report.rmse_history[0] < 1e-6);
  CHECK(report.holdout_rmse < 1e-6);
  CHECK(fis.evaluate(0.31, -0.47) == doctest::Approx(2.0 * 0.31 - 3.0 * 0.47).epsilon(1e-6));
}

TEST_CASE("least squares never raises the training error") {
  const TrainingDataset data = grid_dataset(-1.0, 1.0, 41, [](double e, double r) {
    return std::sin(2.0 * e) * std::cos(r) + 0.3 * e;
  });
  SugenoFis fis = anfis_init(data);
  TrainConfig config;
  config.epochs = 15;
  const TrainReport report = anfis_train(fis, data, config);
  REQUIRE(report.rmse_before_lsq.size() == 15);
  REQUIRE(report.rmse_history.size() == 15);
  for (int k = 0; k < 15; ++k) {
    CHECK(report.rmse_history[k] <= report.rmse_before_lsq[k] + 1e-12);
  }
  // The nonlinear surface is fit well by the 25-rule model.
  CHECK(report.rmse_history.back() < 0.02);
}

TEST_CASE("no single consequent nudge can lower the training error") {
  const TrainingDataset data = grid_dataset(-1.0, 1.0, 21, [](double e, double r) {
    return std::sin(2.0 * e) * std::cos(r) + 0.3 * e;
  });
  SugenoFis fis = anfis_init(data);
  TrainConfig config;
  config.epochs = 5;
  config.holdout = 0.0;  // optimality is stated on the full training set
  anfis_train(fis, data, config);

  const double base = sse_on(fis, data);
  const double slack = 1e-9 * std::max(1.0, base);
  for (std::size_t k = 0; k < fis.consequents.size(); ++k) {
    for (double delta : {1e-3, -1e-3}) {
      for (int field = 0; field < 3; ++field) {
        SugenoFis poked = fis;
        RuleConsequent& c = poked.consequents[k];
        (field == 0 ? c.p : field == 1 ? c.q : c.r) += delta;
        CHECK(sse_on(poked, data) >= base - slack);
      }
    }
  }
}

TEST_CASE("premise gradient matches central finite differences") {
  const TrainingDataset data =
      grid_dataset(-1.0, 1.0, 7, [](double e, double r) { return e * e - 0.5 * r; });
  SugenoFis fis = anfis_init(data);
  // Break symmetry so no gradient component sits at an exact zero.
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (BellMf& mf : fis.input1_mfs) {
    mf.width += jitter(rng);
    mf.shape += jitter(rng);
    mf.center += jitter(rng);
  }
  for (BellMf& mf : fis.input2_mfs) {
    mf.width += jitter(rng);
    mf.shape += jitter(rng);
    mf.center += jitter(rng);
  }
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (RuleConsequent& c : fis.consequents) c = {coef(rng), coef(rng), coef(rng)};

  const std::vector<double> grad = premise_gradient(fis, data);
  REQUIRE(grad.size() == 30);

  const auto objective = [&](const SugenoFis& f) {
    double acc = 0.0;
    for (const TrainingSample& row : data.rows) {
      const double err = f.evaluate(row.error, row.error_rate) - row.target;
      acc += 0.5 * err * err;
    }
    return acc / data.rows.size();
  };

  const double h = 1e-6;
  int index = 0;
  for (int family = 0; family < 2; ++family) {
    for (int k = 0; k < 5; ++k) {
      for (int field = 0; field < 3; ++field, ++index) {
        SugenoFis plus = fis, minus = fis;
        BellMf& mp = (family == 0 ? plus.input1_mfs : plus.input2_mfs)[k];
        BellMf& mm = (family == 0 ? minus.input1_mfs : minus.input2_mfs)[k];
        (field == 0 ? mp.width : field == 1 ? mp.shape : mp.center) += h;
        (field == 0 ? mm.width : field == 1 ? mm.shape : mm.center) -= h;
        const double fd = (objective(plus) - objective(minus)) / (2.0 * h);
        const double denom = std::max({std::abs(grad[index]), std::abs(fd), 1e-8});
        CHECK(std::abs(grad[index] - fd) / denom < 1e-4);
      }
    }
  }
}

TEST_CASE("collinear inputs are reported as insufficient diversity") {
  TrainingDataset diagonal;
  for (int k = 0; k < 200; ++k) {
    const double v = -1.0 + 2.0 * k / 199.0;
    diagonal.rows.push_back({v, v, 0.5 * v});
  }
  SugenoFis fis = anfis_init(diagonal);
  TrainConfig config;
  config.epochs = 1;
  CHECK_THROWS_AS(anfis_train(fis, diagonal, config), SingularLsq);
}

TEST_CASE("training rejects a zero epoch budget") {
  const TrainingDataset data =
      grid_dataset(-1.0, 1.0, 5, [](double e, double r) { return e + r; });
  SugenoFis fis = anfis_init(data);
  TrainConfig config;
  config.epochs = 0;
  CHECK_THROWS_AS(anfis_train(fis, data, config), ValidationError);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const TrainingDataset data = grid_dataset(-1.0, 1.0, 15, [](double e, double r) {
    return std::tanh(e) - 0.4 * r + 0.1 * e * r;
  });
  TrainConfig config;
  config.epochs = 4;

  SugenoFis a = anfis_init(data);
  SugenoFis b = anfis_init(data);
  const TrainReport ra = anfis_train(a, data, config);
  const TrainReport rb = anfis_train(b, data, config);

  CHECK(ra.holdout_rmse == rb.holdout_rmse);
  REQUIRE(ra.rmse_history.size() == rb.rmse_history.size());
  for (std::size_t k = 0; k < ra.rmse_history.size(); ++k) {
    CHECK(ra.rmse_history[k] == rb.rmse_history[k]);
  }
  for (std::size_t k = 0; k < a.consequents.size(); ++k) {
    CHECK(a.consequents[k].p == b.consequents[k].p);
    CHECK(a.consequents[k].q == b.consequents[k].q);
    CHECK(a.consequents[k].r == b.consequents[k].r);
  }
}

TEST_CASE("teacher battery row counts follow duration and skip") {
  TeacherBattery battery;
  battery.dt = 0.01;
  const ControlAxis axes[] = {ControlAxis::kRoll, ControlAxis::kPitch, ControlAxis::kYaw};
  const double angles_deg[] = {-30.0, 20.0, 45.0};
  for (ControlAxis axis : axes) {
    for (double a : angles_deg) {
      TeacherScenario s;
      s.channel = axis;
      const double rad = a * M_PI / 180.0;
      if (axis == ControlAxis::kRoll) s.initial.angles.phi = rad;
      if (axis == ControlAxis::kPitch) s.initial.angles.theta = rad;
      if (axis == ControlAxis::kYaw) s.initial.angles.psi = rad;
      battery.scenarios.push_back(s);
    }
  }

  const TeacherData data = generate_training_data(
      battery, QuadParams{}, PdGains::altitude_default(), PdGains::attitude_default());
  CHECK(data.attitude.rows.size() == 9 * 2000);
  CHECK(data.altitude.rows.empty());

  TeacherBattery skipped = battery;
  skipped.skip_initial_steps = 5;
  const TeacherData trimmed = generate_training_data(
      skipped, QuadParams{}, PdGains::altitude_default(), PdGains::attitude_default());
  CHECK(trimmed.attitude.rows.size() == 9 * 1995);
}

TEST_CASE("teacher generation and the bundled battery are deterministic") {
  const TeacherBattery battery = default_training_battery(42);
  const TeacherBattery again = default_training_battery(42);
  REQUIRE(battery.scenarios.size() == again.scenarios.size());
  for (std::size_t k = 0; k < battery.scenarios.size(); ++k) {
    CHECK(battery.scenarios[k].initial.position.z() == again.scenarios[k].initial.position.z());
    CHECK(battery.scenarios[k].initial.angles.phi == again.scenarios[k].initial.angles.phi);
    CHECK(battery.scenarios[k].initial.rates.p == again.scenarios[k].initial.rates.p);
  }

  const TeacherBattery different = default_training_battery(43);
  bool any_difference = false;
  for (std::size_t k = 0; k < battery.scenarios.size(); ++k) {
    if (battery.scenarios[k].initial.position.z() !=
        different.scenarios[k].initial.position.z())
      any_difference = true;
  }
  CHECK(any_difference);
}

TEST_CASE("attitude mimicry reaches the pinned holdout accuracy") {
  TeacherBattery battery;
  battery.dt = 0.01;
  battery.skip_initial_steps = 5;
  const ControlAxis axes[] = {ControlAxis::kRoll, ControlAxis::kPitch, ControlAxis::kYaw};
  for (ControlAxis axis : axes) {
    for (double a : {-45.0, 20.0, 60.0}) {
      TeacherScenario s;
      s.channel = axis;
      const double rad = a * M_PI / 180.0;
      if (axis == ControlAxis::kRoll) s.initial.angles.phi = rad;
      if (axis == ControlAxis::kPitch) s.initial.angles.theta = rad;
      if (axis == ControlAxis::kYaw) s.initial.angles.psi = rad;
      battery.scenarios.push_back(s);
    }
  }
  const TeacherData data = generate_training_data(
      battery, QuadParams{}, PdGains::altitude_default(), PdGains::attitude_default());

  double mean = 0.0;
  for (const TrainingSample& row : data.attitude.rows) mean += row.target;
  mean /= data.attitude.rows.size();
  double var = 0.0;
  for (const TrainingSample& row : data.attitude.rows) {
    var += (row.target - mean) * (row.target - mean);
  }
  const double teacher_std = std::sqrt(var / data.attitude.rows.size());

  SugenoFis fis = anfis_init(data.attitude);
  const TrainReport report = anfis_train(fis, data.attitude, TrainConfig{});
  CHECK(report.holdout_rmse < 0.05 * teacher_std);
}

TEST_CASE("controller step adds the weight feedforward on the altitude axis only") {
  SugenoFis fis = random_small_fis(31);
  for (RuleConsequent& c : fis.consequents) c = {0.0, 0.0, 0.0};
  const QuadParams params;
  CHECK(fuzzy_controller_step(fis, 0.3, -0.1, ControlAxis::kAltitude, params) ==
        doctest::Approx(params.mass * params.gravity).epsilon(1e-12));
  CHECK(fuzzy_controller_step(fis, 0.3, -0.1, ControlAxis::kRoll, params) == 0.0);
  CHECK(fuzzy_controller_step(fis, 0.3, -0.1, ControlAxis::kYaw, params) == 0.0);
}

TEST_CASE("model files round trip losslessly and reject corruption") {
  const TrainingDataset data =
      grid_dataset(-1.5, 1.5, 15, [](double e, double r) { return 0.4 * e - 0.2 * r; });
  SugenoFis fis = anfis_init(data);
  TrainConfig config;
  config.epochs = 2;
  anfis_train(fis, data, config);

  const fs::path path = temp_dir() / "model_roundtrip.txt";
  save_fis(fis, path.string());
  const SugenoFis loaded = load_fis(path.string());

  std::mt19937 rng(33);
  std::uniform_real_distribution<double> x(-1.5, 1.5);
  for (int k = 0; k < 100; ++k) {
    const double xe = x(rng), ye = x(rng);
    CHECK(loaded.evaluate(xe, ye) == fis.evaluate(xe, ye));
  }

  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  const fs::path truncated = temp_dir() / "model_truncated.txt";
  std::ofstream(truncated) << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(load_fis(truncated.string()), SimError);

  const fs::path garbled = temp_dir() / "model_garbled.txt";
  std::string bad = text;
  bad.replace(bad.find("mf 1 0"), 6, "mf 9 0");
  std::ofstream(garbled) << bad;
  CHECK_THROWS_AS(load_fis(garbled.string()), ParseError);

  CHECK_THROWS_AS(load_fis((temp_dir() / "missing_model.txt").string()), ParseError);
}

TEST_CASE("saving a malformed model is refused") {
  SugenoFis fis = random_small_fis(41);
  std::swap(fis.input1_mfs[1].center, fis.input1_mfs[3].center);  // break ordering
  CHECK_THROWS_AS(save_fis(fis, (temp_dir() / "never_written.txt").string()), ValidationError);
}

}  // TEST_SUITE
