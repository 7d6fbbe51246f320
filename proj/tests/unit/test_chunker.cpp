#include <doctest.h>

#include <random>

#include "chunk_oracle.hpp"
#include "groundchat/chunker.hpp"
#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"
#include "random_text.hpp"

using namespace groundchat;
using namespace groundchat::chunker;

namespace {

std::string alternating_ab(std::size_t repeats) {
    std::string s;
    for (std::size_t i = 0; i < repeats; ++i) s += "a b ";
    s.pop_back();
    return s;
}

std::vector<testing::OracleChunk> as_oracle(const std::vector<Chunk>& chunks) {
    std::vector<testing::OracleChunk> out;
    for (const auto& c : chunks) out.push_back({c.text, c.hard_cut});
    return out;
}

}  // namespace

TEST_CASE("estimate_tokens") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    // Counts scalar values, not bytes.
    CHECK(estimate_tokens("\xc3\xa4\xc3\xb6\xc3\xbc\xc3\x9f") == 1);
    std::size_t prev = 0;
    std::string s;
    for (int i = 0; i < 64; ++i) {
        s += (i % 3 == 0) ? "\xe2\x82\xac" : "x";
        const auto est = estimate_tokens(s);
        CHECK(est >= prev);
        prev = est;
    }
}

TEST_CASE("policy validation") {
    ChunkPolicy policy;
    policy.chunk_budget_tokens = 15;
    CHECK_THROWS_AS(policy.validate(), Error);
    policy.chunk_budget_tokens = 16;
    CHECK_NOTHROW(policy.validate());
}

TEST_CASE("short text is a single chunk") {
    auto chunks = split("Hi", ChunkPolicy{}, "doc");
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].text == "Hi");
    CHECK(chunks[0].index == 0);
    CHECK(chunks[0].doc_id == "doc");
    CHECK(chunks[0].token_estimate == 1);
    CHECK(split("", ChunkPolicy{}).empty());
}

TEST_CASE("alternating 'a b' text of about 10,000 chars against the oracle") {
    const std::string text = alternating_ab(2500);  // 9,999 chars, 2,500 tokens
    REQUIRE(text.size() == 9999);
    const auto chunks = split(text, ChunkPolicy{});
    const auto expected = testing::oracle_split(text, 1000, true);
    REQUIRE(expected);
    CHECK(as_oracle(chunks) == *expected);

    // Frozen from the oracle run above.
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].text.size() == 3999);
    CHECK(chunks[1].text.size() == 3999);
    CHECK(chunks[2].text.size() == 1999);
    for (const auto& c : chunks) CHECK(c.token_estimate <= 1000);
    CHECK(reconstruct(chunks) == text);
}

TEST_CASE("whitespace-free run is hard cut at the budget") {
    const std::string text(8000, 'x');
    auto chunks = split(text, ChunkPolicy{});
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text.size() == 4000);
    CHECK(chunks[1].text.size() == 4000);
    CHECK(chunks[0].hard_cut);
    CHECK_FALSE(chunks[1].hard_cut);
    CHECK(reconstruct(chunks) == text);
}

TEST_CASE("hard cut disabled") {
    ChunkPolicy policy;
    policy.hard_cut_allowed = false;
    try {
        split(std::string(8000, 'x'), policy);
        FAIL("expected unsplittable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unsplittable);
    }
    CHECK(split(alternating_ab(2500), policy).size() == 3);
}

TEST_CASE("space exactly at the capacity boundary is consumed") {
    ChunkPolicy policy;
    policy.chunk_budget_tokens = 16;  // 64 chars
    const std::string text = std::string(64, 'a') + " " + std::string(10, 'b');
    auto chunks = split(text, policy);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text == std::string(64, 'a'));
    CHECK_FALSE(chunks[0].hard_cut);
    CHECK(chunks[1].text == std::string(10, 'b'));
}

TEST_CASE("rejects text that is not normalized") {
    CHECK_THROWS_AS(split(" lead", ChunkPolicy{}), Error);
    CHECK_THROWS_AS(split("double  space", ChunkPolicy{}), Error);
}

TEST_CASE("properties on random normalized strings") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> budget_dist(16, 300);
    for (int round = 0; round < 300; ++round) {
        const std::string text = testing::random_normalized_string(rng, 3000);
        REQUIRE(ingest::is_normalized(text));
        ChunkPolicy policy;
        policy.chunk_budget_tokens = budget_dist(rng);
        const auto chunks = split(text, policy);

        bool any_hard_cut = false;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const auto& c = chunks[i];
            CHECK(c.index == i);
            CHECK(!c.text.empty());
            CHECK(c.text.front() != ' ');
            CHECK(c.text.back() != ' ');
            CHECK(c.token_estimate == estimate_tokens(c.text));
            CHECK(c.token_estimate <= policy.chunk_budget_tokens);
            CHECK(c.token_estimate > 0);
            any_hard_cut = any_hard_cut || c.hard_cut;
            // Greedy minimality: the next word would not have fit.
            if (i + 1 < chunks.size() && !c.hard_cut) {
                const auto& next = chunks[i + 1].text;
                const std::string first_word = next.substr(0, next.find(' '));
                CHECK(estimate_tokens(c.text + " " + first_word) > policy.chunk_budget_tokens);
            }
        }
        CHECK(reconstruct(chunks) == text);
        if (!any_hard_cut) {
            std::string joined;
            for (const auto& c : chunks) joined += (joined.empty() ? "" : " ") + c.text;
            CHECK(joined == text);
        }
        CHECK(split(text, policy) == chunks);
        const auto oracle = testing::oracle_split(text, policy.chunk_budget_tokens, true);
        REQUIRE(oracle);
        CHECK(as_oracle(chunks) == *oracle);
    }
}
