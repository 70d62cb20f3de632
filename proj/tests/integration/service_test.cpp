#include <cohortflow/app/projection.hpp>
#include <cohortflow/app/service.hpp>

#include <cohortflow/estimation.hpp>
#include <cohortflow/serialization.hpp>

#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace cohortflow::app {
namespace {

TransitionModel fitted_worked_model() {
    const auto truth = testing::worked_example_with_departures({100, 0, 0});
    SyntheticConfig gen{truth, StateVector({300, 300, 300}), 3, InflowMode::FixedPerTerm, 5, "T"};
    FitConfig cfg;
    cfg.space = truth.space();
    return fit(generate_synthetic(gen), cfg);
}

class ServiceTest : public ::testing::Test {
protected:
    ProjectionService service{testing::worked_example_model({10, 0, 0})};
};

TEST_F(ServiceTest, ModelDocumentMatchesFileFormat) {
    const auto r = service.get_model();
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.content_type, "application/json");
    EXPECT_EQ(read_model(r.body), service.model());
    EXPECT_EQ(r.body, write_model(service.model()));
}

TEST_F(ServiceTest, States) {
    const Json doc = Json::parse(service.get_states().body);
    EXPECT_EQ(doc["enrolled"], Json::parse(R"(["Freshman","Sophomore","Junior"])"));
    EXPECT_EQ(doc["absorbing"], Json::parse(R"(["Departed"])"));
}

TEST_F(ServiceTest, Healthz) {
    const auto r = service.healthz();
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body, "ok");
}

TEST_F(ServiceTest, ProjectMatchesLibraryDocument) {
    const auto r = service.post_project(R"({
        "initial": {"Freshman": 100, "Sophomore": 100, "Junior": 100},
        "horizon": 3,
        "scenario": {"inflow_multiplier": 2}
    })");
    ASSERT_EQ(r.status, 200) << r.body;
    ScenarioSpec spec;
    spec.inflow_override = InflowMultiplier{2.0};
    spec.horizon = 3;
    const Json expected =
        projection_document(service.model(), StateVector({100, 100, 100}), 3, spec);
    EXPECT_EQ(r.body, expected.dump());
    const Json doc = Json::parse(r.body);
    EXPECT_EQ(doc["deltas"].size(), 4U);
    // Extra 10 entrants each step accumulate linearly in the total.
    EXPECT_NEAR(doc["deltas"][3]["total"].get<double>(), 30.0, 1e-9);
}

TEST_F(ServiceTest, IdentityScenarioEqualsBaseline) {
    const auto r = service.post_project(
        R"({"initial": {"Freshman": 7}, "horizon": 5, "scenario": {}})");
    ASSERT_EQ(r.status, 200) << r.body;
    const Json doc = Json::parse(r.body);
    EXPECT_EQ(doc["baseline"], doc["scenario"]);
}

TEST_F(ServiceTest, NullScenarioOmitsComparison) {
    const Json doc = Json::parse(
        service.post_project(R"({"initial": {"Freshman": 7}, "horizon": 1, "scenario": null})")
            .body);
    EXPECT_TRUE(doc["scenario"].is_null());
    EXPECT_TRUE(doc["deltas"].is_null());
}

TEST_F(ServiceTest, OverridesAboveOneAre422NamingTheRow) {
    const auto r = service.post_project(R"({
        "initial": {"Freshman": 1}, "horizon": 2,
        "scenario": {"cell_overrides": [
            {"from": "Junior", "to": "Junior", "probability": 0.6},
            {"from": "Junior", "to": "Freshman", "probability": 0.6}]}
    })");
    EXPECT_EQ(r.status, 422);
    const Json doc = Json::parse(r.body);
    EXPECT_EQ(doc["error"]["code"], "invalid_scenario");
    EXPECT_NE(doc["error"]["message"].get<std::string>().find("Junior"), std::string::npos);
}

TEST_F(ServiceTest, UnknownStatesAre422) {
    EXPECT_EQ(service.post_project(R"({"initial": {"Wizard": 1}, "horizon": 1})").status, 422);
    EXPECT_EQ(service
                  .post_project(R"({"initial": {"Freshman": 1}, "horizon": 1,
                      "scenario": {"cell_overrides": [{"from": "Wizard", "to": "Junior", "probability": 0.1}]}})")
                  .status,
              422);
}

TEST_F(ServiceTest, MalformedBodiesAre400) {
    for (const char* body : {
             "not json",
             "[]",
             R"({"horizon": 1})",
             R"({"initial": {"Freshman": 1}})",
             R"({"initial": {"Freshman": 1}, "horizon": 0})",
             R"({"initial": {"Freshman": 1}, "horizon": "3"})",
             R"({"initial": {"Freshman": "many"}, "horizon": 1})",
             R"({"initial": 5, "horizon": 1})",
             R"({"initial": {"Freshman": 1}, "horizon": 1, "scenario": {"bogus": 1}})",
         }) {
        const auto r = service.post_project(body);
        EXPECT_EQ(r.status, 400) << body;
        const Json doc = Json::parse(r.body);
        EXPECT_EQ(doc["error"]["code"], "bad_request") << body;
        EXPECT_TRUE(doc["error"]["message"].is_string());
    }
}

TEST(ServiceFromModelDataTest, UsesStoredCounts) {
    const auto model = fitted_worked_model();
    const ProjectionService service(model);
    const auto r = service.post_project(R"({"initial": "from_model_data", "horizon": 2})");
    ASSERT_EQ(r.status, 200) << r.body;
    const Json doc = Json::parse(r.body);
    EXPECT_EQ(r.body,
              projection_document(model, initial_from_model(model), 2, std::nullopt).dump());
    EXPECT_GT(doc["baseline"]["points"][0]["total"].get<double>(), 0.0);

    const ProjectionService bare(testing::worked_example_model());
    EXPECT_EQ(bare.post_project(R"({"initial": "from_model_data", "horizon": 2})").status, 422);
}

TEST(ResolvePortTest, Precedence) {
    ::unsetenv("COHORTFLOW_PORT");
    EXPECT_EQ(resolve_port(std::nullopt), 8080);
    ::setenv("COHORTFLOW_PORT", "9123", 1);
    EXPECT_EQ(resolve_port(std::nullopt), 9123);
    EXPECT_EQ(resolve_port(7000), 7000);
    ::setenv("COHORTFLOW_PORT", "http", 1);
    EXPECT_THROW(resolve_port(std::nullopt), ArgumentError);
    ::unsetenv("COHORTFLOW_PORT");
}

TEST(LiveServerTest, RoundTripOverHttp) {
    const ProjectionService service(testing::worked_example_model());
    httplib::Server server;
    mount_routes(server, service, std::nullopt);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const auto health = client.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->body, "ok");

    const auto model = client.Get("/api/model");
    ASSERT_TRUE(model);
    EXPECT_EQ(read_model(model->body), service.model());

    const auto projected = client.Post(
        "/api/project",
        R"({"initial": {"Freshman": 100, "Sophomore": 100, "Junior": 100}, "horizon": 2})",
        "application/json");
    ASSERT_TRUE(projected);
    EXPECT_EQ(projected->status, 200);
    EXPECT_EQ(projected->get_header_value("Content-Type"), "application/json");
    const Json doc = Json::parse(projected->body);
    EXPECT_NEAR(doc["baseline"]["points"][2]["counts"]["Junior"].get<double>(), 76.0, 1e-9);

    const auto bad = client.Post("/api/project", "{", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);

    const auto missing = client.Get("/api/nothing");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(Json::parse(missing->body)["error"]["code"], "not_found");

    server.stop();
    worker.join();
}

TEST(LiveServerTest, ConcurrentRequestsAgree) {
    const ProjectionService service(testing::worked_example_model({3, 2, 1}));
    httplib::Server server;
    mount_routes(server, service, std::nullopt);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const std::string body = R"({"initial": {"Freshman": 50}, "horizon": 40})";
    const std::string expected = service.post_project(body).body;
    std::vector<std::thread> clients;
    std::vector<std::string> seen(8);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        clients.emplace_back([&, i] {
            httplib::Client client("127.0.0.1", port);
            if (auto r = client.Post("/api/project", body, "application/json")) {
                seen[i] = r->body;
            }
        });
    }
    for (auto& t : clients) {
        t.join();
    }
    for (const auto& s : seen) {
        EXPECT_EQ(s, expected);
    }
    server.stop();
    worker.join();
}

} // namespace
} // namespace cohortflow::app
