#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuitgraph/datagen.hpp"
#include "circuitgraph/gcn.hpp"
#include "circuitgraph/metrics.hpp"
#include "circuitgraph/rng.hpp"

using namespace circuitgraph;

namespace {

/// 7-class confusion with one dominant error mode: 52 of the 226 samples of
/// class 2 land in class 3, everything else is perfect. Supports match a
/// 30% holdout of an 857-per-class corpus.
std::vector<std::vector<long>> headline_confusion() {
    const long supports[7] = {310, 247, 226, 213, 225, 289, 282};
    std::vector<std::vector<long>> m(7, std::vector<long>(7, 0));
    for (int c = 0; c < 7; ++c) m[c][c] = supports[c];
    m[2][2] = 226 - 52;
    m[2][3] = 52;
    return m;
}

} // namespace

TEST_CASE("confusion-derived metrics: the two-class error mode") {
    const EvalReport r = metrics_from_confusion(headline_confusion());

    // Exact fractions first.
    CHECK(r.per_class[3].precision == doctest::Approx(213.0 / 265.0).epsilon(1e-12));
    CHECK(r.per_class[3].recall == 1.0);
    CHECK(r.per_class[2].precision == 1.0);
    CHECK(r.per_class[2].recall == doctest::Approx(174.0 / 226.0).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(1740.0 / 1792.0).epsilon(1e-12));

    // Rounded to two decimals these reproduce the reported quality numbers.
    CHECK(std::fabs(r.per_class[3].precision - 0.80) < 0.005);
    CHECK(std::fabs(r.per_class[2].recall - 0.77) < 0.005);
    CHECK(std::fabs(r.per_class[2].f1 - 0.87) < 0.005);
    CHECK(std::fabs(r.per_class[3].f1 - 0.89) < 0.005);
    CHECK(std::fabs(r.accuracy - 0.97) < 0.005);
    CHECK(std::fabs(r.macro_avg.precision - 0.97197) < 0.005);
    CHECK(std::fabs(r.macro_avg.recall - 0.96713) < 0.005);
    CHECK(std::fabs(r.macro_avg.f1 - 0.96590) < 0.005);
    CHECK(std::fabs(r.weighted_avg.f1 - 0.97069) < 0.005);

    // Unaffected classes stay perfect.
    for (const int c : {0, 1, 4, 5, 6}) {
        CHECK(r.per_class[c].precision == 1.0);
        CHECK(r.per_class[c].recall == 1.0);
        CHECK(r.per_class[c].f1 == 1.0);
    }
    CHECK(r.per_class[2].support == 226);
    CHECK(r.per_class[3].support == 213);
}

TEST_CASE("accuracy equals support-weighted recall") {
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        const int classes = 2 + static_cast<int>(rng.uniform_int(5));
        std::vector<std::vector<long>> m(classes, std::vector<long>(classes, 0));
        for (auto& row : m)
            for (auto& v : row) v = static_cast<long>(rng.uniform_int(30));
        m[0][0] += 1; // guarantee at least one sample
        const EvalReport r = metrics_from_confusion(m);
        CHECK(std::fabs(r.accuracy - r.weighted_avg.recall) < 1e-12);
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
    }
}

TEST_CASE("never-predicted classes have undefined precision, counted as zero") {
    // Class 1 exists (support 4) but every prediction lands in class 0.
    const std::vector<std::vector<long>> m{{6, 0}, {4, 0}};
    const EvalReport r = metrics_from_confusion(m);
    CHECK(r.per_class[0].precision_defined);
    CHECK(!r.per_class[1].precision_defined);
    CHECK(r.per_class[1].precision == 0.0);
    CHECK(r.per_class[1].recall == 0.0);
    CHECK(r.per_class[1].f1 == 0.0);
    CHECK(r.macro_avg.precision == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(r.accuracy == 0.6);
}

TEST_CASE("confusion matrix validation") {
    CHECK_THROWS_AS(metrics_from_confusion({}), Error);
    CHECK_THROWS_AS(metrics_from_confusion({{1, 2}, {3}}), Error);
    CHECK_THROWS_AS(metrics_from_confusion({{0, 0}, {0, 0}}), Error);
}

TEST_CASE("evaluate: confusion rows match supports on a real pipeline") {
    const Dataset ds = generate(Suite::Continuous7, 5, 29, FeatureConfig::optimal());
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.hidden_dim = 8;
    cfg.layers = 2;
    cfg.seed = 1;
    const auto [model, history] = train(ds, ds, 2, cfg);

    const EvalReport r = evaluate(model, ds);
    REQUIRE(r.confusion.size() == 7);
    long total = 0;
    for (int c = 0; c < 7; ++c) {
        long row = 0;
        for (long v : r.confusion[c]) row += v;
        CHECK(row == 5); // every sample of class c lands in exactly one cell
        CHECK(r.per_class[c].support == 5);
        total += row;
    }
    CHECK(total == 35);
    CHECK(r.class_names == ds.class_names);
    CHECK(r.embeddings.size() == ds.samples.size());
    // Final-epoch test accuracy (same set here) matches evaluate's accuracy.
    CHECK(history.back().test_accuracy == doctest::Approx(r.accuracy).epsilon(1e-12));

    // Embedded labels mirror the dataset.
    for (std::size_t i = 0; i < r.embeddings.size(); ++i) {
        CHECK(r.embeddings[i].true_label == ds.samples[i].label);
        CHECK(r.embeddings[i].predicted_label >= 0);
        CHECK(r.embeddings[i].predicted_label < 7);
    }
}

TEST_CASE("evaluate input validation") {
    const Dataset ds = generate(Suite::Continuous7, 2, 3, FeatureConfig::optimal());
    const GcnModel model = init_model(10, 4, 1, 7, 1);

    Dataset empty = ds;
    empty.samples.clear();
    try {
        evaluate(model, empty);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyDataset");
    }

    const GcnModel narrow = init_model(9, 4, 1, 7, 1);
    try {
        evaluate(narrow, ds);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "DimensionMismatch");
    }

    const GcnModel fewer = init_model(10, 4, 1, 3, 1);
    try {
        evaluate(fewer, ds);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "DimensionMismatch");
    }
}

TEST_CASE("embedding: determinism, variance ordering, degenerate corpus") {
    const Dataset ds = generate(Suite::Continuous7, 6, 15, FeatureConfig::optimal());
    const GcnModel model = init_model(10, 8, 2, 7, 77);

    bool degenerate = true;
    const auto pts = embed_2d(model, ds, &degenerate);
    CHECK(!degenerate);
    REQUIRE(pts.size() == ds.samples.size());
    for (const auto& p : pts) {
        CHECK(std::isfinite(p.x));
        CHECK(std::isfinite(p.y));
    }

    // First component carries at least as much variance as the second.
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= pts.size();
    my /= pts.size();
    double vx = 0.0, vy = 0.0;
    for (const auto& p : pts) {
        vx += (p.x - mx) * (p.x - mx);
        vy += (p.y - my) * (p.y - my);
    }
    CHECK(vx >= vy);
    CHECK(vx > 0.0);

    // Centering: projections of centered data have (near-)zero mean.
    CHECK(std::fabs(mx) < 1e-9);
    CHECK(std::fabs(my) < 1e-9);

    const auto again = embed_2d(model, ds, &degenerate);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].x == again[i].x);
        CHECK(pts[i].y == again[i].y);
    }

    // A corpus with identical samples has zero variance -> all points at the
    // origin and the degenerate flag raised.
    Dataset flat = ds;
    for (auto& s : flat.samples) s = ds.samples[0];
    bool flat_degenerate = false;
    const auto origin = embed_2d(model, flat, &flat_degenerate);
    CHECK(flat_degenerate);
    for (const auto& p : origin) {
        CHECK(p.x == 0.0);
        CHECK(p.y == 0.0);
    }
}

TEST_CASE("embedding is stable under sample reordering") {
    const Dataset ds = generate(Suite::Continuous7, 4, 21, FeatureConfig::optimal());
    const GcnModel model = init_model(10, 8, 2, 7, 3);
    const auto pts = embed_2d(model, ds);

    Dataset reversed = ds;
    std::reverse(reversed.samples.begin(), reversed.samples.end());
    const auto rpts = embed_2d(model, reversed);

    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::fabs(pts[i].x - rpts[n - 1 - i].x) < 1e-6);
        CHECK(std::fabs(pts[i].y - rpts[n - 1 - i].y) < 1e-6);
        CHECK(pts[i].true_label == rpts[n - 1 - i].true_label);
    }
}

TEST_CASE("report serialization: json, table, csv") {
    EvalReport r = metrics_from_confusion(headline_confusion(),
                                          {"a", "b", "c", "d", "e", "f", "g"});
    r.embeddings = {{1.5, -2.5, 0, 0}, {0.25, 0.75, 1, 2}};

    const std::string js = report_to_json(r);
    const auto j = nlohmann::json::parse(js);
    CHECK(j.at("accuracy").get<double>() == doctest::Approx(1740.0 / 1792.0));
    CHECK(j.at("confusion").size() == 7);
    CHECK(j.at("confusion")[2][3].get<long>() == 52);
    CHECK(j.at("per_class").size() == 7);
    CHECK(j.at("per_class")[3].at("precision").get<double>() ==
          doctest::Approx(213.0 / 265.0));
    CHECK(j.at("macro_avg").at("f1").get<double>() == doctest::Approx(0.96590).epsilon(1e-4));
    CHECK(j.at("class_names")[0].get<std::string>() == "a");
    CHECK(j.at("embeddings").size() == 2);

    const std::string table = format_report(r);
    CHECK(table.find("precision") != std::string::npos);
    CHECK(table.find("macro avg") != std::string::npos);
    CHECK(table.find("weighted avg") != std::string::npos);
    CHECK(table.find("accuracy") != std::string::npos);
    CHECK(table.find("0.80") != std::string::npos); // class 3 precision, 2 dp
    CHECK(table.find("0.77") != std::string::npos); // class 2 recall, 2 dp
    CHECK(table.find("1740/1792") != std::string::npos);

    const std::string csv = embeddings_to_csv(r.embeddings);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "x,y,true_label,predicted_label");
    std::getline(lines, line);
    CHECK(line == "1.5,-2.5,0,0");
    std::getline(lines, line);
    CHECK(line == "0.25,0.75,1,2");
    CHECK(!std::getline(lines, line));
}
