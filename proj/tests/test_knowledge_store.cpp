#include "synthetic_corpus.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/knowledge_store.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ifcmcp;

TEST_CASE("knowledge: tokenizer")
{
    CHECK(tokenize("IfcWall, a U-value of 0.25!") ==
          std::vector<std::string>{"ifcwall", "value", "of", "25"});
    CHECK(tokenize("").empty());
}

TEST_CASE("knowledge: chunk arithmetic")
{
    std::mt19937 rng(2);
    for (int round = 0; round < 200; ++round) {
        std::string text;
        int paras = 1 + rng() % 12;
        for (int p = 0; p < paras; ++p) {
            int words = 1 + rng() % 400;
            for (int w = 0; w < words; ++w)
                text += std::string(1 + rng() % 9, static_cast<char>('a' + rng() % 26)) + " ";
            text += "\n\n";
        }
        auto chunks = chunk_text(text);
        REQUIRE_FALSE(chunks.empty());
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            CHECK(chunks[i].size() <= kChunkMax);
            CHECK_FALSE(chunks[i].empty());
        }
        // every word of the source survives somewhere
        std::size_t covered = 0;
        for (const auto& c : chunks)
            covered += c.size();
        CHECK(covered >= text.size() / 2);
    }
    CHECK(chunk_text("").empty());
    CHECK(chunk_text("short text").size() == 1);
}

TEST_CASE("knowledge: BM25 scores follow the formula")
{
    Bm25Index idx;
    idx.add_document("a", "wall wall slab");
    idx.add_document("b", "slab roof");
    idx.add_document("c", "door");
    auto hits = idx.search("wall", 5);
    REQUIRE(hits.size() == 1);
    double n = 3, df = 1, avg = (3 + 2 + 1) / 3.0, tf = 2, len = 3;
    double idf = std::log(1 + (n - df + 0.5) / (df + 0.5));
    double want = idf * tf * (kBm25K1 + 1) / (tf + kBm25K1 * (1 - kBm25B + kBm25B * len / avg));
    CHECK(hits[0].score == doctest::Approx(want).epsilon(1e-12));
    CHECK(hits[0].chunk.doc_id == "a");

    auto slab = idx.search("slab", 5);
    REQUIRE(slab.size() == 2);
    CHECK(slab[0].chunk.doc_id == "b"); // shorter document wins
    CHECK(idx.search("nothing matches", 5).empty());
    try {
        Bm25Index().search("x");
        FAIL("expected EmptyIndex");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyIndex);
    }
}

TEST_CASE("knowledge: unique tokens retrieve their document; persistence is lossless")
{
    auto docs = testing_support::synthetic_corpus(50, 77);
    Bm25Index idx;
    for (const auto& d : docs)
        idx.add_document(d.id, d.text);
    Bm25Index back = Bm25Index::deserialize(idx.serialize());
    CHECK(back.size() == idx.size());
    for (std::size_t i = 0; i < 100; ++i) {
        const auto& d = docs[(i * 7) % docs.size()];
        std::string query = d.unique_token + (i % 2 ? " wall roof" : "");
        auto hits = idx.search(query, 5);
        REQUIRE_FALSE(hits.empty());
        CHECK(hits[0].chunk.doc_id == d.id);
        auto again = back.search(query, 5);
        REQUIRE(again.size() == hits.size());
        for (std::size_t j = 0; j < hits.size(); ++j) {
            CHECK(again[j].chunk.doc_id == hits[j].chunk.doc_id);
            CHECK(again[j].chunk.chunk_index == hits[j].chunk.chunk_index);
            CHECK(again[j].score == hits[j].score);
        }
    }
    CHECK_THROWS_AS(Bm25Index::deserialize("not an index"), Error);
}

TEST_CASE("knowledge: corpus directory indexing and file round-trip")
{
    auto root = std::filesystem::path(IFCMCP_SOURCE_ROOT) / "docs" / "knowledge";
    Bm25Index idx = index_corpus(root);
    CHECK(idx.size() >= 5);
    auto hits = idx.search("Uniclass classification reference", 3);
    REQUIRE_FALSE(hits.empty());
    CHECK(hits[0].chunk.source_path.find("schema_psets.md") != std::string::npos);

    auto file = std::filesystem::temp_directory_path() / "ifcmcp_test_knowledge.idx";
    idx.save(file);
    Bm25Index loaded = Bm25Index::load(file);
    std::filesystem::remove(file);
    CHECK(loaded.serialize() == idx.serialize());
    CHECK_THROWS_AS(index_corpus(root / "missing"), Error);
}

TEST_CASE("knowledge: store swaps whole indexes")
{
    KnowledgeStore store;
    CHECK_FALSE(store.current());
    auto a = std::make_shared<Bm25Index>();
    a->add_document("a", "alpha beta");
    store.replace(a);
    auto held = store.current();
    store.replace(std::make_shared<Bm25Index>());
    CHECK(held->size() == 1);
    CHECK(store.current()->size() == 0);
}
