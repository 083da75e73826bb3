#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "srl/errors.hpp"
#include "srl/tabular.hpp"

using namespace srl;

namespace {
std::string file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

QTable random_table(std::uint64_t seed, int n_keys) {
    RandomGen rng(seed);
    QTable table;
    for (int k = 0; k < n_keys; ++k) {
        std::array<double, kNumActions> values{};
        for (double& v : values) v = rng.uniform_range(-5.0, 5.0);
        table.entries["k" + std::to_string(rng.uniform_int(40))] = values;
    }
    return table;
}
}  // namespace

TEST_CASE("q_update follows the update rule") {
    LearningParams params;

    SUBCASE("alpha = 0 leaves any table unchanged") {
        params.alpha = 0.0;
        RandomGen rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            QTable table = random_table(trial, 6);
            const QTable before = table;
            q_update(table, "k" + std::to_string(rng.uniform_int(40)),
                     static_cast<Action>(rng.uniform_int(kNumActions)),
                     rng.uniform_range(-3.0, 3.0), "k" + std::to_string(rng.uniform_int(40)),
                     rng.uniform_int(2) == 0, params);
            // the touched key may be created, but every value stays put
            for (const auto& [key, values] : table.entries) {
                CHECK(values == before.values(key));
            }
        }
    }
    SUBCASE("hand-evaluated update: 0.45 + 0.1 * 2.8 = 0.73") {
        params.alpha = 0.1;
        params.gamma = 0.9;
        QTable table;
        table.entries["s"] = {0.0, 0.5, 0.0, 0.0, 0.0};
        table.entries["s2"] = {0.0, 2.0, 1.0, 0.0, 0.0};
        q_update(table, "s", Action::Down, 1.0, "s2", false, params);
        CHECK(table.entries["s"][1] == doctest::Approx(0.73).epsilon(1e-12));
    }
    SUBCASE("terminal update with alpha = 1 stores exactly r") {
        params.alpha = 1.0;
        QTable table;
        table.entries["s"] = {0.3, 0.3, 0.3, 0.3, 0.3};
        table.entries["next"] = {9.0, 9.0, 9.0, 9.0, 9.0};
        q_update(table, "s", Action::Left, -1.25, "next", true, params);
        CHECK(table.entries["s"][2] == -1.25);
    }
    SUBCASE("non-finite reward is a contract violation") {
        QTable table;
        CHECK_THROWS_AS(
            q_update(table, "s", Action::Up, std::numeric_limits<double>::quiet_NaN(), "s", false,
                     params),
            ContractError);
    }
}

TEST_CASE("select_action") {
    QTable table;
    RandomGen rng(3);

    SUBCASE("epsilon 0 is a pure argmax") {
        table.entries["s"] = {0.0, 0.0, 3.0, 0.0, 0.0};
        for (int i = 0; i < 10; ++i) CHECK(select_action(table, "s", 0.0, rng) == Action::Left);
    }
    SUBCASE("ties break to the lowest index") {
        table.entries["flat"] = {1.0, 1.0, 1.0, 1.0, 1.0};
        CHECK(select_action(table, "flat", 0.0, rng) == Action::Up);
        CHECK(select_action(table, "unseen", 0.0, rng) == Action::Up);
    }
    SUBCASE("epsilon 1 draws each action at 0.2 +- 0.02") {
        table.entries["s"] = {0.0, 0.0, 3.0, 0.0, 0.0};
        std::array<int, kNumActions> counts{};
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            counts[static_cast<std::size_t>(select_action(table, "s", 1.0, rng))] += 1;
        }
        for (int count : counts) CHECK(std::abs(count / static_cast<double>(n) - 0.2) < 0.02);
    }
}

TEST_CASE("merge_tables implements the combine step") {
    SUBCASE("disjoint tables pass through") {
        QTable a, b;
        a.entries["k1"] = {1, 0, 0, 0, 0};
        b.entries["k2"] = {0, 2, 0, 0, 0};
        const QTable merged = merge_tables({a, b});
        CHECK(merged.entries.size() == 2);
        CHECK(merged.values("k1") == a.entries["k1"]);
        CHECK(merged.values("k2") == b.entries["k2"]);
    }
    SUBCASE("shared keys store the element-wise mean") {
        QTable a, b;
        a.entries["s"] = {1, 3, 0, 0, 0};
        b.entries["s"] = {3, 5, 0, 0, 0};
        const QTable merged = merge_tables({a, b});
        CHECK(merged.values("s") == std::array<double, kNumActions>{2, 4, 0, 0, 0});
    }
    SUBCASE("single table is the identity") {
        const QTable t = random_table(8, 10);
        CHECK(merge_tables({t}).entries == t.entries);
    }
    SUBCASE("duplicates are idempotent") {
        const QTable t = random_table(9, 10);
        CHECK(merge_tables({t, t}).entries == t.entries);
    }
    SUBCASE("output is independent of input order") {
        const QTable a = random_table(1, 12);
        const QTable b = random_table(2, 12);
        const QTable c = random_table(3, 12);
        const QTable abc = merge_tables({a, b, c});
        CHECK(merge_tables({c, a, b}).entries == abc.entries);
        CHECK(merge_tables({b, c, a}).entries == abc.entries);
    }
    SUBCASE("empty input is a contract violation") {
        CHECK_THROWS_AS(merge_tables({}), ContractError);
    }
}

TEST_CASE("greedy argmax is invariant under uniform positive scaling") {
    RandomGen rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        QTable table = random_table(200 + static_cast<std::uint64_t>(trial), 8);
        QTable scaled = table;
        const double factor = rng.uniform_range(0.1, 20.0);
        for (auto& [key, values] : scaled.entries) {
            for (double& v : values) v *= factor;
        }
        for (const auto& [key, values] : table.entries) {
            RandomGen a(1), b(1);
            CHECK(select_action(table, key, 0.0, a) == select_action(scaled, key, 0.0, b));
        }
    }
}

TEST_CASE("repeated q_update converges to the closed-form optimum") {
    // Deterministic 2-state chain: from s0 action 0 pays 1 and leads to s1,
    // other actions pay 0 and stay; from s1 every action pays 2 and ends.
    const double gamma = 0.9;
    const auto reward = [](const std::string& s, int a) {
        return s == "s1" ? 2.0 : (a == 0 ? 1.0 : 0.0);
    };
    const auto next_state = [](const std::string& s, int a) {
        return s == "s1" ? std::string("s1") : (a == 0 ? std::string("s1") : std::string("s0"));
    };
    const auto is_terminal = [](const std::string& s) { return s == "s1"; };

    // Independent oracle: value iteration on the enumerated model.
    std::map<std::string, std::array<double, kNumActions>> q_star{{"s0", {}}, {"s1", {}}};
    for (int sweep = 0; sweep < 400; ++sweep) {
        auto next = q_star;
        for (auto& [s, values] : next) {
            for (int a = 0; a < kNumActions; ++a) {
                const std::string s2 = next_state(s, a);
                double bootstrap = 0.0;
                if (!is_terminal(s)) {
                    const auto& nv = q_star[s2];
                    bootstrap = *std::max_element(nv.begin(), nv.end());
                }
                values[static_cast<std::size_t>(a)] = reward(s, a) + gamma * bootstrap;
            }
        }
        q_star = next;
    }
    CHECK(q_star["s0"][0] == doctest::Approx(2.8).epsilon(1e-9));
    CHECK(q_star["s0"][1] == doctest::Approx(2.52).epsilon(1e-9));
    CHECK(q_star["s1"][3] == doctest::Approx(2.0).epsilon(1e-9));

    LearningParams params;
    params.alpha = 0.5;
    params.gamma = gamma;
    QTable table;
    for (int sweep = 0; sweep < 400; ++sweep) {
        for (const std::string& s : {std::string("s0"), std::string("s1")}) {
            for (int a = 0; a < kNumActions; ++a) {
                q_update(table, s, static_cast<Action>(a), reward(s, a), next_state(s, a),
                         is_terminal(s), params);
            }
        }
    }
    for (const auto& [s, values] : q_star) {
        for (int a = 0; a < kNumActions; ++a) {
            CHECK(std::abs(table.values(s)[static_cast<std::size_t>(a)] -
                           values[static_cast<std::size_t>(a)]) < 1e-6);
        }
    }
}

TEST_CASE("train_tabular") {
    SingleEnvConfig env;
    env.variant = SingleVariant::GoalOnly;
    env.layout = build_junction_layout(3, 2);
    env.seed = 4;
    LearningParams params;

    SUBCASE("zero episodes is a contract violation") {
        CHECK_THROWS_AS(train_tabular(env, params, 0), ContractError);
    }
    SUBCASE("runs the requested episodes and fills the table") {
        const TabularRunResult result = train_tabular(env, params, 40);
        CHECK(result.rows.size() == 40);
        CHECK(!result.table.entries.empty());
        CHECK(result.table.episodes == 40);
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            CHECK(result.rows[i].episode == static_cast<int>(i));
            CHECK(result.rows[i].steps >= 1);
        }
    }
    SUBCASE("an init table is the starting point") {
        const TabularRunResult first = train_tabular(env, params, 40);
        const TabularRunResult resumed = train_tabular(env, params, 1, &first.table);
        CHECK(resumed.table.entries.size() >= first.table.entries.size());
    }
}

TEST_CASE("Q-table file format") {
    const auto path = std::filesystem::temp_directory_path() / "srl_qtable_test.qt";

    SUBCASE("round-trip preserves every value bit for bit, bytes are canonical") {
        const QTable table = random_table(77, 25);
        save_qtable(table, path);
        const std::string bytes = file_bytes(path);
        CHECK(bytes.rfind("SRLQT 1\nactions 5\n", 0) == 0);

        const QTable loaded = load_qtable(path);
        CHECK(loaded.entries == table.entries);

        save_qtable(loaded, path);
        CHECK(file_bytes(path) == bytes);
    }
    SUBCASE("bad header is a parse error") {
        std::ofstream(path) << "SRLQT 2\nactions 5\n";
        CHECK_THROWS_AS(load_qtable(path), ParseError);
        std::ofstream(path) << "SRLQT 1\nactions 4\n";
        CHECK_THROWS_AS(load_qtable(path), ParseError);
        std::ofstream(path) << "SRLQT 1\nactions 5\nkey 1 2 3\n";
        CHECK_THROWS_AS(load_qtable(path), ParseError);
    }
    std::filesystem::remove(path);
}
