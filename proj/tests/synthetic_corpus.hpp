#pragma once
// Synthetic documents for retrieval tests. Every document carries one token
// that appears nowhere else.

#include <random>
#include <string>
#include <vector>

namespace testing_support {

struct SyntheticDoc {
    std::string id;
    std::string text;
    std::string unique_token;
};

inline std::vector<SyntheticDoc> synthetic_corpus(std::size_t n, std::uint64_t seed)
{
    static const std::vector<std::string> common{
        "wall", "slab", "roof", "door", "window", "storey", "property", "set", "schema", "entity",
        "geometry", "placement", "profile", "extrusion", "type", "building", "site", "project"};
    std::mt19937_64 rng(seed);
    std::vector<SyntheticDoc> docs;
    for (std::size_t i = 0; i < n; ++i) {
        SyntheticDoc d;
        d.id = "doc" + std::to_string(1000 + i);
        d.unique_token = "zq" + std::to_string(7000 + i * 13) + "marker";
        int paragraphs = 1 + static_cast<int>(rng() % 4);
        for (int p = 0; p < paragraphs; ++p) {
            int words = 20 + static_cast<int>(rng() % 200);
            for (int w = 0; w < words; ++w)
                d.text += common[rng() % common.size()] + (w % 17 == 16 ? ".\n" : " ");
            if (p == 0)
                d.text += d.unique_token + " ";
            d.text += "\n\n";
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

} // namespace testing_support
