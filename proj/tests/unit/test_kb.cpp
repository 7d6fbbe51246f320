#include <doctest.h>

#include <filesystem>
#include <nlohmann/json.hpp>
#include <unistd.h>
#include <random>
#include <set>

#include "chunk_oracle.hpp"
#include "fake_fetcher.hpp"
#include "fixture_server.hpp"
#include "fixtures.hpp"
#include "groundchat/kb.hpp"

using namespace groundchat;
using namespace groundchat::kb;
using namespace std::chrono_literals;

namespace {

template <class Fn>
Error error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an Error");
    return Error(ErrorCode::internal, "unreachable");
}

struct Fixture {
    ManualClock clock{1'700'000'000};
    testing::FakeFetcher fetcher;
    KbOptions options;

    Fixture() {
        fetcher.put("https://a.example", "<p>Hi</p>");
        fetcher.put("https://b.example/notes", "Plain notes here.", ingest::Media::plain);
    }

    KnowledgeBase make(const std::string& session = "sess1") { return KnowledgeBase(session, options, fetcher, clock); }
};

// Every view, chunk list and summary agrees with the source list.
void check_integrity(const KnowledgeBase& kb) {
    const auto sources = kb.sources();
    const auto views = kb.get_extracted_text();
    REQUIRE(views.size() == sources.size());
    std::size_t chunk_total = 0;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        CHECK(views[i].source == sources[i]);
        const auto chunks = kb.chunks(sources[i].id);
        CHECK(chunks == chunker::split(views[i].text, kb.policy(), sources[i].id));
        for (const auto& c : chunks) CHECK(c.doc_id == sources[i].id);
        chunk_total += chunks.size();
    }
    const auto all = kb.all_chunks();
    CHECK(all.size() == chunk_total);
    std::set<std::string> ids;
    for (const auto& s : sources) ids.insert(s.id);
    for (const auto& c : all) CHECK(ids.count(c.doc_id) == 1);
    CHECK(kb.summary().source_count == sources.size());
    CHECK(kb.summary().chunk_count == chunk_total);
    CHECK(kb.has_sources() == !sources.empty());
}

}  // namespace

TEST_CASE("add one URL") {
    Fixture f;
    auto kb = f.make();
    CHECK_FALSE(kb.has_sources());
    auto report = kb.add_url_sources("https://a.example");
    REQUIRE(report.added.size() == 1);
    CHECK(report.failures.empty());
    CHECK(report.added[0].kind == ingest::SourceKind::url);
    CHECK(report.added[0].locator == "https://a.example");
    CHECK(report.added[0].added_at == 1'700'000'000);
    auto views = kb.get_extracted_text();
    REQUIRE(views.size() == 1);
    CHECK(views[0].source.locator == "https://a.example");
    CHECK(views[0].text == "Hi");
    CHECK(kb.extraction_count() == 1);
    CHECK(kb.has_sources());
    check_integrity(kb);
}

TEST_CASE("empty URL list changes nothing") {
    Fixture f;
    auto kb = f.make();
    auto report = kb.add_url_sources("");
    CHECK(report.added.empty());
    CHECK(report.failures.empty());
    CHECK(kb.add_url_sources(" , ,").added.empty());
    CHECK_FALSE(kb.has_sources());
    CHECK(f.fetcher.fetches() == 0);
    CHECK(kb.get_extracted_text().empty());
}

TEST_CASE("partial failure keeps the good URLs") {
    Fixture f;
    auto kb = f.make();
    auto report = kb.add_url_sources("https://a.example, https://bad.example");
    REQUIRE(report.added.size() == 1);
    CHECK(report.added[0].locator == "https://a.example");
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].locator == "https://bad.example");
    CHECK(report.failures[0].code == ErrorCode::fetch_status);
    CHECK(report.failures[0].status == std::optional<int>(404));
    CHECK(kb.sources().size() == 1);

    // Extraction failures are reported the same way.
    f.fetcher.put("https://empty.example", "<script>x()</script>");
    report = kb.add_url_sources("https://empty.example,https://b.example/notes");
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].code == ErrorCode::empty_after_extraction);
    REQUIRE(report.added.size() == 1);
    CHECK(kb.get_extracted_text(report.added[0].id)[0].text == "Plain notes here.");
    check_integrity(kb);
}

TEST_CASE("malformed URL list is rejected whole") {
    Fixture f;
    auto kb = f.make();
    CHECK(error_of([&] { kb.add_url_sources("https://a.example, ftp://x"); }).code() == ErrorCode::invalid_url);
    CHECK_FALSE(kb.has_sources());
    CHECK(f.fetcher.fetches() == 0);
}

TEST_CASE("concurrent fetches commit in input order") {
    Fixture f;
    f.options.fetch_parallelism = 4;
    std::string input;
    for (int i = 0; i < 8; ++i) {
        const auto url = "https://p" + std::to_string(i) + ".example";
        f.fetcher.put(url, "page " + std::to_string(i), ingest::Media::plain, std::chrono::milliseconds(80 - 10 * i));
        input += url + ",";
    }
    auto kb = f.make();
    const auto t0 = std::chrono::steady_clock::now();
    auto report = kb.add_url_sources(input);
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    REQUIRE(report.added.size() == 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(report.added[i].locator == "https://p" + std::to_string(i) + ".example");
        CHECK(kb.sources()[i] == report.added[i]);
        CHECK(kb.get_extracted_text()[i].text == "page " + std::to_string(i));
    }
    CHECK(elapsed < 360ms);  // sequential would take 360 ms
    std::set<std::string> ids;
    for (const auto& s : report.added) ids.insert(s.id);
    CHECK(ids.size() == 8);
}

TEST_CASE("duplicate URLs become distinct sources") {
    Fixture f;
    auto kb = f.make();
    auto report = kb.add_url_sources("https://a.example,https://a.example");
    REQUIRE(report.added.size() == 2);
    CHECK(report.added[0].id != report.added[1].id);
    check_integrity(kb);
}

TEST_CASE("PDF sources") {
    Fixture f;
    auto kb = f.make();
    auto ref = kb.add_pdf_source("fixture.pdf", testing::read_fixture("grammar.pdf"));
    CHECK(ref.kind == ingest::SourceKind::pdf);
    CHECK(ref.locator == "fixture.pdf");
    CHECK(kb.extraction_count() == 1);
    CHECK(kb.get_extracted_text(ref.id)[0].text == "Grammar rules.");

    CHECK(error_of([&] { kb.add_pdf_source("scan.pdf", testing::read_fixture("image_only.pdf")); }).code() ==
          ErrorCode::no_text_layer);
    CHECK(error_of([&] { kb.add_pdf_source("zero.pdf", ""); }).code() == ErrorCode::empty_upload);
    CHECK(error_of([&] { kb.add_pdf_source("junk.pdf", "not a pdf at all"); }).code() == ErrorCode::pdf_parse);
    CHECK(kb.sources().size() == 1);
    CHECK(kb.extraction_count() == 1);
}

TEST_CASE("view and delete") {
    Fixture f;
    auto kb = f.make();
    CHECK(kb.get_extracted_text().empty());
    CHECK(error_of([&] { kb.get_extracted_text(std::string("nope")); }).code() == ErrorCode::unknown_source);
    CHECK(error_of([&] { kb.chunks("nope"); }).code() == ErrorCode::unknown_source);

    auto a = kb.add_url_sources("https://a.example").added.at(0);
    auto s = kb.delete_extracted(a.id);
    CHECK(s.source_count == 0);
    CHECK_FALSE(kb.has_sources());
    CHECK(kb.all_chunks().empty());
    CHECK(error_of([&] { kb.delete_extracted(a.id); }).code() == ErrorCode::unknown_source);

    auto refs = kb.add_url_sources("https://a.example,https://b.example/notes").added;
    REQUIRE(refs.size() == 2);
    kb.delete_extracted(refs[0].id);
    REQUIRE(kb.sources().size() == 1);
    CHECK(kb.sources()[0] == refs[1]);
    CHECK(kb.get_extracted_text()[0].text == "Plain notes here.");
    check_integrity(kb);
}

TEST_CASE("cached text is never re-extracted") {
    Fixture f;
    auto kb = f.make();
    kb.add_url_sources("https://a.example");
    const auto fetches = f.fetcher.fetches();
    for (int i = 0; i < 50; ++i) {
        kb.get_extracted_text();
        kb.all_chunks();
        kb.summary();
    }
    CHECK(kb.extraction_count() == 1);
    CHECK(f.fetcher.fetches() == fetches);
}

TEST_CASE("randomized add and delete keep references intact") {
    Fixture f;
    f.options.policy.chunk_budget_tokens = 16;
    std::mt19937 rng(11);
    std::vector<std::string> urls;
    for (int i = 0; i < 12; ++i) {
        const auto url = "https://r" + std::to_string(i) + ".example";
        std::string body;
        const int words = 1 + static_cast<int>(rng() % 60);
        for (int w = 0; w < words; ++w) body += "w" + std::to_string(rng() % 1000) + (w % 7 == 6 ? "\n" : " ");
        f.fetcher.put(url, body, ingest::Media::plain);
        urls.push_back(url);
    }
    auto kb = f.make();
    std::vector<std::string> expected;  // locators in order
    for (int op = 0; op < 400; ++op) {
        if (expected.empty() || rng() % 3 != 0) {
            const auto& url = urls[rng() % urls.size()];
            kb.add_url_sources(url);
            expected.push_back(url);
        } else {
            const auto sources = kb.sources();
            const auto victim = rng() % sources.size();
            kb.delete_extracted(sources[victim].id);
            expected.erase(expected.begin() + static_cast<long>(victim));
        }
        if (op % 20 == 0) check_integrity(kb);
        const auto sources = kb.sources();
        REQUIRE(sources.size() == expected.size());
        for (std::size_t i = 0; i < sources.size(); ++i) CHECK(sources[i].locator == expected[i]);
    }
    check_integrity(kb);
}

TEST_CASE("chunks follow the session policy") {
    Fixture f;
    f.options.policy.chunk_budget_tokens = 1000;
    std::string text;
    while (text.size() < 9'999) text += text.size() % 2 == 0 ? "a" : " ";
    text.resize(9'999);
    f.fetcher.put("https://long.example", text, ingest::Media::plain);
    auto kb = f.make();
    auto ref = kb.add_url_sources("https://long.example").added.at(0);
    const auto oracle = testing::oracle_split(text, 1000, true);
    REQUIRE(oracle);
    const auto chunks = kb.chunks(ref.id);
    REQUIRE(chunks.size() == oracle->size());
    for (std::size_t i = 0; i < chunks.size(); ++i) CHECK(chunks[i].text == (*oracle)[i].text);

    Fixture g;
    g.options.policy.chunk_budget_tokens = 8;
    CHECK(error_of([&] { g.make(); }).code() == ErrorCode::invalid_config);
}

TEST_CASE("snapshots round trip without re-extraction") {
    Fixture f;
    auto kb = f.make("sessA");
    kb.add_url_sources("https://a.example,https://b.example/notes");
    f.clock.advance(30);
    kb.add_pdf_source("multi.pdf", testing::read_fixture("multipage.pdf"));
    const auto text = kb.to_ndjson();

    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 3);
    auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(first["session"] == "sessA");
    CHECK(first["source"]["locator"] == "https://a.example");
    CHECK(first["source"]["kind"] == "url");
    CHECK(first["text"] == "Hi");
    CHECK(first["extracted_at"] == 1'700'000'000);
    CHECK(text.find("\"session\":\"sessA\",\"source\":{\"id\":") == 1);

    auto copy = f.make("sessA");
    copy.restore_ndjson(text);
    CHECK(copy.extraction_count() == 0);
    CHECK(copy.sources() == kb.sources());
    CHECK(copy.all_chunks() == kb.all_chunks());
    CHECK(copy.to_ndjson() == text);
    check_integrity(copy);

    const auto dir = std::filesystem::temp_directory_path() / ("gc_kb_test_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    kb.save_snapshot(dir);
    auto loaded = f.make("sessA");
    CHECK(loaded.load_snapshot(dir));
    CHECK(loaded.to_ndjson() == text);
    auto other = f.make("sessB");
    CHECK_FALSE(other.load_snapshot(dir));
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed snapshots are rejected") {
    Fixture f;
    auto kb = f.make();
    kb.add_url_sources("https://a.example");
    const auto before = kb.to_ndjson();
    for (const std::string bad : {
             std::string("not json\n"),
             std::string(R"({"session":"x","text":"Hi","extracted_at":1})"),
             std::string(R"({"session":"x","source":{"id":"a","kind":"ftp","locator":"l","added_at":1},"text":"Hi","extracted_at":1})"),
             std::string(R"({"session":"x","source":{"id":"a","kind":"url","locator":"l","added_at":1},"text":" Hi","extracted_at":1})"),
             std::string(R"({"session":"x","source":{"id":"a","kind":"url","locator":"l","added_at":1},"text":"Hi","extracted_at":1})"
                         "\n"
                         R"({"session":"x","source":{"id":"a","kind":"url","locator":"l","added_at":1},"text":"Hi","extracted_at":1})"),
         }) {
        CHECK_THROWS_AS(kb.restore_ndjson(bad), Error);
        CHECK(kb.to_ndjson() == before);
    }
    kb.restore_ndjson("");
    CHECK_FALSE(kb.has_sources());
}

TEST_CASE("real fetcher against a local server") {
    testing::FixtureServer server;
    server.server().Get("/page", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("<html><nav>menu</nav><p>Nouns name things.</p></html>", "text/html");
    });
    server.start();
    ManualClock clock(5);
    ingest::HttpFetcher fetcher;
    KnowledgeBase kb("s", {}, fetcher, clock);
    auto report = kb.add_url_sources(server.url("/page") + ", " + server.url("/missing"));
    REQUIRE(report.added.size() == 1);
    CHECK(kb.get_extracted_text()[0].text == "Nouns name things.");
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].status == std::optional<int>(404));
}
