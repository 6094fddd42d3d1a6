#include "ifcmcp/knowledge_store.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/json_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ifcmcp {

namespace fs = std::filesystem;

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2)
            out.push_back(cur);
        cur.clear();
    };
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u))
            cur += static_cast<char>(std::tolower(u));
        else
            flush();
    }
    flush();
    return out;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> paragraphs(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t blank = std::string_view::npos;
        for (std::size_t i = start; i < text.size(); ++i) {
            if (text[i] != '\n')
                continue;
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r'))
                ++j;
            if (j < text.size() && text[j] == '\n') {
                blank = i;
                break;
            }
        }
        std::size_t end = blank == std::string_view::npos ? text.size() : blank;
        auto p = trim(text.substr(start, end - start));
        if (!p.empty())
            out.push_back(p);
        if (blank == std::string_view::npos)
            break;
        start = blank + 1;
    }
    return out;
}

// Cuts before `limit`, preferring the last whitespace in the second half.
std::size_t cut_point(std::string_view s, std::size_t limit)
{
    if (s.size() <= limit)
        return s.size();
    for (std::size_t i = limit; i > limit / 2; --i)
        if (std::isspace(static_cast<unsigned char>(s[i])))
            return i;
    return limit;
}

std::string overlap_tail(std::string_view chunk)
{
    if (chunk.size() <= kChunkOverlap)
        return std::string(chunk);
    std::size_t from = chunk.size() - kChunkOverlap;
    for (std::size_t i = from; i < chunk.size(); ++i)
        if (std::isspace(static_cast<unsigned char>(chunk[i]))) {
            from = i + 1;
            break;
        }
    return std::string(trim(chunk.substr(from)));
}

} // namespace

std::vector<std::string> chunk_text(std::string_view text)
{
    const std::size_t piece_max = kChunkTarget - kChunkOverlap;
    std::vector<std::string_view> segments;
    for (auto p : paragraphs(text)) {
        if (p.size() <= kChunkTarget) {
            segments.push_back(p);
            continue;
        }
        while (!p.empty()) {
            std::size_t cut = cut_point(p, piece_max);
            segments.push_back(trim(p.substr(0, cut)));
            p = trim(p.substr(cut));
        }
    }

    std::vector<std::string> chunks;
    std::size_t i = 0;
    while (i < segments.size()) {
        std::string cur = chunks.empty() ? std::string() : overlap_tail(chunks.back());
        bool added = false;
        while (i < segments.size()) {
            std::size_t extra = segments[i].size() + (cur.empty() ? 0 : 2);
            if (added && cur.size() + extra > kChunkTarget)
                break;
            if (!added && !cur.empty() && cur.size() + extra > kChunkMax)
                cur.clear();
            if (!cur.empty())
                cur += "\n\n";
            cur += segments[i++];
            added = true;
        }
        chunks.push_back(std::move(cur));
    }
    return chunks;
}

Bm25Index::Bm25Index(std::vector<DocChunk> chunks)
{
    for (auto& c : chunks) {
        chunks_.push_back(std::move(c));
        index_chunk(chunks_.size() - 1);
    }
}

void Bm25Index::add_document(const std::string& doc_id, std::string_view text, const std::string& source_path,
                             std::vector<std::string> tags)
{
    int n = 0;
    for (auto& body : chunk_text(text)) {
        chunks_.push_back(DocChunk{doc_id, n++, std::move(body), source_path, tags});
        index_chunk(chunks_.size() - 1);
    }
}

void Bm25Index::index_chunk(std::size_t slot)
{
    auto tokens = tokenize(chunks_[slot].text);
    lengths_.push_back(tokens.size());
    total_length_ += tokens.size();
    std::map<std::string, int> tf;
    for (auto& t : tokens)
        ++tf[t];
    for (auto& [term, n] : tf) {
        auto it = postings_.find(term);
        if (it == postings_.end())
            it = postings_.emplace(term, std::vector<Posting>{}).first;
        it->second.push_back({slot, n});
    }
}

std::vector<SearchHit> Bm25Index::search(std::string_view query, std::size_t k) const
{
    if (chunks_.empty())
        throw Error(ErrorCode::EmptyIndex, "knowledge index is empty");
    const double n = static_cast<double>(chunks_.size());
    const double avgdl = std::max(1.0, static_cast<double>(total_length_) / n);

    std::vector<double> scores(chunks_.size(), 0.0);
    std::set<std::string> terms;
    for (auto& t : tokenize(query))
        terms.insert(t);
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end())
            continue;
        double df = static_cast<double>(it->second.size());
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            double tf = p.tf;
            double norm = kBm25K1 * (1.0 - kBm25B + kBm25B * static_cast<double>(lengths_[p.chunk]) / avgdl);
            scores[p.chunk] += idf * tf * (kBm25K1 + 1.0) / (tf + norm);
        }
    }

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] > 0.0)
            order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b])
            return scores[a] > scores[b];
        const auto& ca = chunks_[a];
        const auto& cb = chunks_[b];
        if (ca.doc_id != cb.doc_id)
            return ca.doc_id < cb.doc_id;
        return ca.chunk_index < cb.chunk_index;
    });
    if (order.size() > k)
        order.resize(k);
    std::vector<SearchHit> hits;
    for (auto i : order)
        hits.push_back({chunks_[i], scores[i]});
    return hits;
}

std::string Bm25Index::serialize() const
{
    Json chunks = Json::array();
    for (const auto& c : chunks_)
        chunks.push_back(Json{{"doc_id", c.doc_id},
                              {"chunk_index", c.chunk_index},
                              {"source_path", c.source_path},
                              {"tags", c.tags},
                              {"text", c.text}});
    Json body{{"k1", kBm25K1}, {"b", kBm25B}, {"chunks", std::move(chunks)}};
    return std::string(kIndexMagic) + "\n" + body.dump() + "\n";
}

Bm25Index Bm25Index::deserialize(std::string_view data)
{
    auto nl = data.find('\n');
    if (nl == std::string_view::npos || data.substr(0, nl) != kIndexMagic)
        throw Error(ErrorCode::IoError, "not a knowledge index file (bad magic header)");
    Json body;
    try {
        body = Json::parse(data.substr(nl + 1));
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("corrupt knowledge index: ") + e.what());
    }
    std::vector<DocChunk> chunks;
    for (const auto& c : body.at("chunks"))
        chunks.push_back(DocChunk{c.at("doc_id").get<std::string>(), c.at("chunk_index").get<int>(),
                                  c.at("text").get<std::string>(), c.at("source_path").get<std::string>(),
                                  c.at("tags").get<std::vector<std::string>>()});
    return Bm25Index(std::move(chunks));
}

void Bm25Index::save(const fs::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << serialize();
    if (!out)
        throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

Bm25Index Bm25Index::load(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

namespace {

std::vector<std::string> tags_for(const fs::path& rel)
{
    std::vector<std::string> tags;
    std::string lower;
    for (char c : rel.generic_string())
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower.find("schema") != std::string::npos || rel.extension() == ".ifc")
        tags.push_back("schema");
    if (lower.find("example") != std::string::npos || rel.extension() == ".py")
        tags.push_back("example");
    if (lower.find("api") != std::string::npos)
        tags.push_back("api");
    if (tags.empty())
        tags.push_back("doc");
    return tags;
}

} // namespace

Bm25Index index_corpus(const fs::path& root)
{
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw Error(ErrorCode::IoError, "knowledge corpus is not a readable directory: " + root.string());
    static const std::set<std::string> exts{".md", ".txt", ".rst", ".py", ".ifc"};
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec))
        if (it->is_regular_file() && exts.count(it->path().extension().string()))
            files.push_back(it->path());
    if (ec)
        throw Error(ErrorCode::IoError, "cannot list " + root.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());

    Bm25Index index;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::IoError, "cannot read " + f.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        fs::path rel = fs::relative(f, root);
        index.add_document(rel.generic_string(), ss.str(), f.string(), tags_for(rel));
    }
    return index;
}

std::shared_ptr<const Retriever> KnowledgeStore::current() const
{
    std::lock_guard lock(mutex_);
    return index_;
}

void KnowledgeStore::replace(std::shared_ptr<const Retriever> next)
{
    std::lock_guard lock(mutex_);
    index_ = std::move(next);
}

} // namespace ifcmcp
