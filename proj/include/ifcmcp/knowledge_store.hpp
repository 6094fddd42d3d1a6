#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace ifcmcp {

struct DocChunk {
    std::string doc_id;
    int chunk_index = 0;
    std::string text;
    std::string source_path;
    std::vector<std::string> tags;
};

struct SearchHit {
    DocChunk chunk;
    double score = 0.0;
};

inline constexpr std::size_t kChunkTarget = 1000;
inline constexpr std::size_t kChunkOverlap = 200;
inline constexpr std::size_t kChunkMax = 1500;
inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;

/// Lowercase, split on non-alphanumerics, drop tokens shorter than 2.
std::vector<std::string> tokenize(std::string_view text);

/// Paragraph-packed chunks of about kChunkTarget characters; each chunk after
/// the first starts with up to kChunkOverlap characters of the previous one.
std::vector<std::string> chunk_text(std::string_view text);

class Retriever {
public:
    virtual ~Retriever() = default;
    virtual std::vector<SearchHit> search(std::string_view query, std::size_t k = 5) const = 0;
    virtual std::size_t size() const = 0;
};

class Bm25Index : public Retriever {
public:
    Bm25Index() = default;
    explicit Bm25Index(std::vector<DocChunk> chunks);

    void add_document(const std::string& doc_id, std::string_view text, const std::string& source_path = {},
                      std::vector<std::string> tags = {});

    /// Ranked by BM25, ties by (doc_id, chunk_index); zero scores dropped.
    /// Throws EmptyIndex when there is nothing to search.
    std::vector<SearchHit> search(std::string_view query, std::size_t k = 5) const override;
    std::size_t size() const override { return chunks_.size(); }
    const std::vector<DocChunk>& chunks() const { return chunks_; }

    std::string serialize() const;
    static Bm25Index deserialize(std::string_view data);
    void save(const std::filesystem::path& path) const;
    static Bm25Index load(const std::filesystem::path& path);

private:
    void index_chunk(std::size_t slot);

    struct Posting {
        std::size_t chunk;
        int tf;
    };
    std::vector<DocChunk> chunks_;
    std::vector<std::size_t> lengths_;
    std::size_t total_length_ = 0;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

/// Indexes every .md, .txt, .rst, .py and .ifc file below `root` in path
/// order. Throws IoError if root is not a readable directory.
Bm25Index index_corpus(const std::filesystem::path& root);

inline constexpr std::string_view kIndexMagic = "IFCMCP-KNOWLEDGE-INDEX v1";

/// Shared handle that readers copy and rebuilds replace whole.
class KnowledgeStore {
public:
    std::shared_ptr<const Retriever> current() const;
    void replace(std::shared_ptr<const Retriever> next);

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const Retriever> index_;
};

} // namespace ifcmcp
