#include <cohortflow/serialization.hpp>

#include "fixtures.hpp"

#include <gtest/gtest.h>

namespace cohortflow {
namespace {

TEST(ScenarioJsonTest, ParsesOverridesAndMultiplier) {
    const auto spec = scenario_from_json(Json::parse(R"({
        "cell_overrides": [{"from": "Freshman", "to": "Sophomore", "probability": 0.4}],
        "inflow_multiplier": 2,
        "horizon": 5
    })"),
                                         1);
    ASSERT_EQ(spec.cell_overrides.size(), 1U);
    EXPECT_EQ(spec.cell_overrides[0], (CellOverride{"Freshman", "Sophomore", 0.4}));
    EXPECT_EQ(std::get<InflowMultiplier>(spec.inflow_override).factor, 2.0);
    EXPECT_EQ(spec.horizon, 5);
}

TEST(ScenarioJsonTest, NullAndEmptyObjectAreEmptyScenarios) {
    EXPECT_TRUE(scenario_from_json(Json(nullptr), 3).empty());
    const auto spec = scenario_from_json(Json::object(), 3);
    EXPECT_TRUE(spec.empty());
    EXPECT_EQ(spec.horizon, 3);
}

TEST(ScenarioJsonTest, AbsoluteInflow) {
    const auto spec = scenario_from_json(Json::parse(R"({"inflow": {"Freshman": 900}})"), 1);
    EXPECT_EQ(std::get<InflowAbsolute>(spec.inflow_override).values.at("Freshman"), 900.0);
}

TEST(ScenarioJsonTest, RoundTrips) {
    ScenarioSpec spec;
    spec.cell_overrides = {{"A", "B", 0.25}, {"B", "B", 0.5}};
    spec.inflow_override = InflowAbsolute{{{"A", 3.0}}};
    spec.horizon = 12;
    EXPECT_EQ(scenario_from_json(scenario_to_json(spec), 1), spec);
    spec.inflow_override = InflowMultiplier{0.5};
    EXPECT_EQ(scenario_from_json(scenario_to_json(spec), 1), spec);
}

TEST(ScenarioJsonTest, RejectsMalformedDocuments) {
    for (const char* text : {
             R"([1, 2])",
             R"({"surprise": 1})",
             R"({"cell_overrides": {}})",
             R"({"cell_overrides": [{"from": "A", "probability": 0.1}]})",
             R"({"cell_overrides": [{"from": "A", "to": "B", "probability": "high"}]})",
             R"({"inflow_multiplier": 2, "inflow": {"A": 1}})",
             R"({"inflow": [1, 2]})",
             R"({"horizon": 2.5})",
         }) {
        EXPECT_THROW(scenario_from_json(Json::parse(text), 1), ParseError) << text;
    }
}

TEST(TrajectoryJsonTest, ShapeAndValues) {
    const auto model = testing::worked_example_with_departures({10, 0, 0});
    const auto trajectory = project(StateVector({100, 100, 100}), model, 1);
    const Json doc = trajectory_to_json(trajectory, model.space());
    EXPECT_EQ(doc["horizon"], 1);
    EXPECT_EQ(doc["states"], Json::parse(R"(["Freshman", "Sophomore", "Junior"])"));
    EXPECT_EQ(doc["absorbing"], Json::parse(R"(["Departed"])"));
    ASSERT_EQ(doc["points"].size(), 2U);
    const Json& p1 = doc["points"][1];
    EXPECT_EQ(p1["step"], 1);
    EXPECT_NEAR(p1["counts"]["Freshman"].get<double>(), 110 * 0.95 + 10, 1e-9);
    EXPECT_NEAR(p1["flows"]["outflow_total"].get<double>(), 15.0, 1e-9);
    EXPECT_NEAR(p1["flows"]["per_absorbing"]["Departed"].get<double>(), 15.0, 1e-9);
    EXPECT_EQ(p1["flows"]["inflow_total"], 10.0);
    EXPECT_NEAR(p1["total"].get<double>(), 295.0, 1e-9);
}

TEST(TrajectoryCsvTest, HeaderAndRows) {
    const auto model = testing::worked_example_model();
    const std::string csv = trajectory_to_csv(project(StateVector({100, 100, 100}), model, 1),
                                              model.space());
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "step,Freshman,Sophomore,Junior,total,inflow_total,outflow_total");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_NE(csv.find("\n0,100.0,100.0,100.0,300.0,0.0,0.0\n"), std::string::npos) << csv;
}

TEST(DeltasJsonTest, LabelledPerState) {
    const auto model = testing::worked_example_model();
    const auto base = project(StateVector({1, 2, 3}), model, 2);
    const Json doc = deltas_to_json(compare(base, base), model.space());
    ASSERT_EQ(doc.size(), 3U);
    EXPECT_EQ(doc[2]["step"], 2);
    EXPECT_EQ(doc[2]["per_state"]["Junior"], 0.0);
    EXPECT_EQ(doc[2]["total"], 0.0);
}

TEST(ReportJsonTest, MissingDifferenceIsNull) {
    EvaluationReport report;
    report.rows.push_back({"T1", 0.0, 5.0, std::nullopt, {}});
    report.rows.push_back({"T2", 100.0, 110.0, 10.0, {{"A", {100.0, 110.0}}}});
    report.bias_pct = 10.0;
    report.mean_abs_difference_pct = 10.0;
    const Json doc = report_to_json(report);
    EXPECT_TRUE(doc["rows"][0]["difference_pct"].is_null());
    EXPECT_FALSE(doc["rows"][0].contains("per_state"));
    EXPECT_EQ(doc["rows"][1]["per_state"]["A"]["actual"], 110.0);
    EXPECT_EQ(doc["bias_pct"], 10.0);
}

TEST(ParseLabelValuesTest, Examples) {
    EXPECT_EQ(parse_label_values("Freshman=100,Sophomore=2.5"),
              (std::map<std::string, double>{{"Freshman", 100.0}, {"Sophomore", 2.5}}));
    EXPECT_TRUE(parse_label_values("").empty());
    EXPECT_THROW(parse_label_values("Freshman"), ParseError);
    EXPECT_THROW(parse_label_values("=4"), ParseError);
    EXPECT_THROW(parse_label_values("A=x"), ParseError);
    EXPECT_THROW(parse_label_values("A=1z"), ParseError);
    EXPECT_THROW(parse_label_values("A=1,A=2"), ParseError);
}

} // namespace
} // namespace cohortflow
