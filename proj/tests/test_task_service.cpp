#include "fixtures.hpp"

#include "fter/task_service.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <set>
#include <thread>

using namespace fter;
using fter::testing::records;
using nlohmann::json;

namespace {

GroundTruth pairs_truth(std::size_t n) {
    GroundTruth t;
    for (std::size_t r = 0; r < n; ++r) t.entity_of.push_back(static_cast<std::uint32_t>(r / 2));
    for (std::size_t e = 0; e < (n + 1) / 2; ++e) t.entity_names.push_back("e" + std::to_string(e));
    return t;
}

std::string answer_body(const std::string& id, const std::string& answer, const std::string& worker = "w1") {
    return json{{"task_id", id}, {"answer", answer}, {"worker_id", worker}}.dump();
}

struct FakeClock {
    std::chrono::steady_clock::time_point t{};
    std::function<std::chrono::steady_clock::time_point()> fn() {
        return [this] { return t; };
    }
};

/// Answers every served task from the truth until nothing is left.
void drain(TaskService& s, const VotesGraph& g, const GroundTruth& truth) {
    while (true) {
        const auto r = s.get_task();
        if (r.status == 204) break;
        REQUIRE(r.status == 200);
        const auto task = json::parse(r.body);
        const auto a = g.index_of(task["records"][0]["id"].get<std::string>());
        const auto b = g.index_of(task["records"][1]["id"].get<std::string>());
        const auto reply = s.post_answer(answer_body(task["task_id"], truth.same({a, b}) ? "yes" : "no"));
        REQUIRE(reply.status == 200);
    }
}

/// Replays a service answer log; counts pairs asked out of order.
class LogCrowd : public CrowdSource {
public:
    explicit LogCrowd(std::vector<RecordedVote> log) : log_(std::move(log)) {}
    std::optional<Answer> answer(Pair pair) override {
        if (next_ >= log_.size()) return std::nullopt;
        const auto& v = log_[next_++];
        if (v.pair != pair) ++mismatches;
        return v.answer;
    }
    std::size_t mismatches{0};

private:
    std::vector<RecordedVote> log_;
    std::size_t next_{0};
};

}  // namespace

TEST_CASE("fresh service serves a task with the question") {
    auto g = records(4);
    TaskService s(Engine(g, EngineConfig{}));
    const auto r = s.get_task();
    REQUIRE(r.status == 200);
    const auto task = json::parse(r.body);
    CHECK(task["question"] == "Do these two records refer to the same real-world entity?");
    REQUIRE(task["records"].size() == 2);
    CHECK(task["records"][0]["id"] != task["records"][1]["id"]);
    CHECK(task["records"][0]["payload"].is_null());
    CHECK(task["task_id"].is_string());
}

TEST_CASE("payloads are passed through") {
    VotesGraph g;
    g.add_record({"a", "http://img/a.jpg"});
    g.add_record({"b", "plain text"});
    TaskService s(Engine(g, EngineConfig{}));
    const auto task = json::parse(s.get_task().body);
    CHECK(task["records"][0]["payload"] == "http://img/a.jpg");
    CHECK(task["records"][1]["payload"] == "plain text");
}

TEST_CASE("open tasks are distinct and capped") {
    ServiceOptions o;
    o.max_outstanding = 3;
    TaskService s(Engine(records(6), EngineConfig{}), o);
    std::set<std::string> ids, pairs;
    for (int k = 0; k < 3; ++k) {
        const auto r = s.get_task();
        REQUIRE(r.status == 200);
        const auto t = json::parse(r.body);
        ids.insert(t["task_id"].get<std::string>());
        pairs.insert(t["records"][0]["id"].get<std::string>() + "-" + t["records"][1]["id"].get<std::string>());
    }
    CHECK(ids.size() == 3);
    CHECK(pairs.size() == 3);
    CHECK(s.get_task().status == 204);
    CHECK(s.open_tasks() == 3);
}

TEST_CASE("exhausted queue gives 204") {
    TaskService s(Engine(records(2), EngineConfig{}));
    for (int k = 0; k < 3; ++k) {
        const auto t = json::parse(s.get_task().body);
        CHECK(s.post_answer(answer_body(t["task_id"], "yes")).status == 200);
    }
    CHECK(s.get_task().status == 204);
}

TEST_CASE("service that is not live refuses tasks") {
    ServiceOptions o;
    o.live = false;
    TaskService s(Engine(records(3), EngineConfig{}), o);
    CHECK(s.get_task().status == 409);
    CHECK(s.status().status == 200);
}

TEST_CASE("answers are integrated exactly once") {
    TaskService s(Engine(records(3), EngineConfig{}));
    const auto t = json::parse(s.get_task().body);
    const auto ok = s.post_answer(answer_body(t["task_id"], "no"));
    REQUIRE(ok.status == 200);
    CHECK(json::parse(ok.body)["cost"] == 1);
    CHECK(s.post_answer(answer_body(t["task_id"], "no")).status == 410);
    CHECK(s.post_answer(answer_body("t999", "yes")).status == 410);
    CHECK(json::parse(s.status().body)["cost"] == 1);
}

TEST_CASE("malformed answers are rejected") {
    TaskService s(Engine(records(3), EngineConfig{}));
    const auto id = json::parse(s.get_task().body)["task_id"].get<std::string>();
    CHECK(s.post_answer("not json").status == 400);
    CHECK(s.post_answer("[1,2]").status == 400);
    CHECK(s.post_answer(json{{"answer", "yes"}, {"worker_id", "w"}}.dump()).status == 400);
    CHECK(s.post_answer(json{{"task_id", id}, {"worker_id", "w"}}.dump()).status == 400);
    CHECK(s.post_answer(json{{"task_id", id}, {"answer", "yes"}}.dump()).status == 400);
    CHECK(s.post_answer(answer_body(id, "maybe")).status == 400);
    CHECK(s.post_answer(json{{"task_id", 7}, {"answer", "yes"}, {"worker_id", "w"}}.dump()).status == 400);
    // the task is still open after the bad attempts
    CHECK(s.post_answer(answer_body(id, "yes")).status == 200);
}

TEST_CASE("expired tasks return to the queue") {
    FakeClock clock;
    ServiceOptions o;
    o.task_ttl = std::chrono::seconds(30);
    o.max_outstanding = 1;
    o.clock = clock.fn();
    TaskService s(Engine(records(3), EngineConfig{}), o);
    const auto first = json::parse(s.get_task().body);
    CHECK(s.get_task().status == 204);
    clock.t += std::chrono::seconds(31);
    CHECK(s.open_tasks() == 0);
    CHECK(s.post_answer(answer_body(first["task_id"], "yes")).status == 410);
    const auto again = json::parse(s.get_task().body);
    CHECK(again["task_id"] != first["task_id"]);
    CHECK(again["records"] == first["records"]);
    CHECK(json::parse(s.status().body)["cost"] == 0);
}

TEST_CASE("status fields") {
    const auto truth = pairs_truth(4);
    auto g = records(4);
    TaskService plain(Engine(g, EngineConfig{}));
    auto st = json::parse(plain.status().body);
    CHECK(st["cost"] == 0);
    CHECK(st["clusters"] == 4);
    CHECK(st["open_tasks"] == 0);
    CHECK_FALSE(st.contains("f"));
    CHECK_FALSE(st.contains("precision"));

    TaskService judged(Engine(g, EngineConfig{}, truth));
    drain(judged, g, truth);
    st = json::parse(judged.status().body);
    CHECK(st["f"] == 1.0);
    CHECK(st["clusters"] == 2);
    CHECK(st["finished"] == true);
}

TEST_CASE("feer re-serves a pair through the api") {
    auto g = records(4);
    g.add_votes({0, 2}, 3, 0);
    g.add_votes({1, 2}, 3, 0);
    g.add_votes({1, 3}, 0, 2);
    GroundTruth truth;
    truth.entity_of = {0, 0, 0, 0};
    truth.entity_names = {"e0"};
    EngineConfig c;
    c.discipline.mode = Discipline::non_monotonic;
    TaskService s(Engine(g, c, truth));
    bool served = false;
    while (true) {
        const auto r = s.get_task();
        if (r.status == 204) break;
        const auto t = json::parse(r.body);
        served = served || (t["records"][0]["id"] == "r1" && t["records"][1]["id"] == "r2");
        s.post_answer(answer_body(t["task_id"], "yes"));
    }
    CHECK(served);
}

TEST_CASE("api run equals direct integration of the same answers") {
    SyntheticSpec spec;
    spec.num_records = 12;
    spec.num_entities = 4;
    spec.seed = 5;
    const auto data = make_synthetic_dataset(spec);
    for (bool batched : {false, true}) {
        EngineConfig c;
        c.batched = batched;
        TaskService s(Engine(data.graph, c, data.truth));
        SyntheticCrowd crowd(*data.truth, {0.2, 0.2, 3});
        while (true) {
            const auto r = s.get_task();
            if (r.status == 204) break;
            const auto t = json::parse(r.body);
            const Pair p{data.graph.index_of(t["records"][0]["id"].get<std::string>()),
                         data.graph.index_of(t["records"][1]["id"].get<std::string>())};
            s.post_answer(answer_body(t["task_id"], *crowd.answer(p) == Answer::yes ? "yes" : "no"));
        }
        const auto log = s.answers();
        LogCrowd replay(log);
        Engine direct(data.graph, c, data.truth);
        run_once(direct, replay);
        CHECK(replay.mismatches == 0);
        s.inspect([&](const Engine& e) {
            CHECK(e.cost() == direct.cost());
            CHECK(e.matrix().scores_equal(direct.matrix()));
            CHECK(e.clustering().clusters() == direct.clustering().clusters());
            return 0;
        });
    }
}

TEST_CASE("http round trip with concurrent workers") {
    const auto truth = pairs_truth(10);
    const auto g = records(10);
    TaskService service(Engine(g, EngineConfig{}, truth));
    HttpFrontend http(service);
    const int port = http.bind("127.0.0.1", 0);
    std::thread server([&] { http.run(); });

    {
        httplib::Client cli("127.0.0.1", port);
        const auto bad = cli.Post("/answer", "{", "application/json");
        REQUIRE(bad);
        CHECK(bad->status == 400);
        const auto gone = cli.Post("/answer", answer_body("t404", "yes"), "application/json");
        REQUIRE(gone);
        CHECK(gone->status == 410);
    }

    std::atomic<int> answered{0}, duplicate_ok{0};
    auto worker = [&](std::string name) {
        httplib::Client cli("127.0.0.1", port);
        int idle = 0;
        while (idle < 20) {
            const auto r = cli.Get("/task");
            if (!r) break;
            if (r->status == 204) {
                ++idle;
                std::this_thread::sleep_for(std::chrono::milliseconds(5));
                continue;
            }
            idle = 0;
            const auto t = json::parse(r->body);
            const Pair p{g.index_of(t["records"][0]["id"].get<std::string>()),
                         g.index_of(t["records"][1]["id"].get<std::string>())};
            const auto body = answer_body(t["task_id"], truth.same(p) ? "yes" : "no", name);
            const auto a = cli.Post("/answer", body, "application/json");
            if (a && a->status == 200) ++answered;
            const auto again = cli.Post("/answer", body, "application/json");
            if (again && again->status == 200) ++duplicate_ok;
        }
    };
    std::vector<std::thread> workers;
    for (int k = 0; k < 3; ++k) workers.emplace_back(worker, "w" + std::to_string(k));
    for (auto& w : workers) w.join();

    httplib::Client cli("127.0.0.1", port);
    const auto st = cli.Get("/status");
    REQUIRE(st);
    const auto body = json::parse(st->body);
    http.stop();
    server.join();

    CHECK(duplicate_ok == 0);
    CHECK(body["cost"] == answered.load());
    CHECK(body["f"] == 1.0);
    CHECK(body["open_tasks"] == 0);
    CHECK(service.answers().size() == static_cast<std::size_t>(answered.load()));
}
