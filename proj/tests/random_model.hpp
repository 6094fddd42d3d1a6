#pragma once
// Random scenes for the query oracle: the generator records what it built so
// the expected aggregates come from the inputs, not from the model.

#include "ifcmcp/bim_tools.hpp"
#include "ifcmcp/json_util.hpp"

#include <cmath>
#include <map>
#include <random>
#include <string>

namespace testing_support {

struct RandomScene {
    ifcmcp::IfcModel model;
    std::map<std::string, int> counts; // selector -> count
    double wall_length = 0.0;
    double wall_area = 0.0;
    double slab_area = 0.0;
    int products = 0;
};

inline RandomScene random_scene(std::uint64_t seed, int max_products = 20)
{
    using namespace ifcmcp;
    std::mt19937_64 rng(seed);
    auto grid = [&](int lo, int hi) { return lo + static_cast<double>(rng() % ((hi - lo) * 4 + 1)) / 4.0; };
    RandomScene s{IfcModel::create("Random", GuidGenerator::seeded(seed)), {}, 0, 0, 0, 0};
    int n = 1 + static_cast<int>(rng() % max_products);
    std::vector<std::pair<std::string, double>> walls; // guid, length
    for (int i = 0; i < n; ++i) {
        int kind = static_cast<int>(rng() % 4);
        if (kind == 0 || (kind == 3 && walls.empty())) {
            Point2 a{grid(0, 30), grid(0, 30)};
            Point2 b{a.x + grid(1, 8), a.y + (rng() % 2 ? 0.0 : grid(1, 8))};
            double h = grid(3, 5);
            std::string g = create_wall(s.model, {a, b, h, 0.2});
            double len = std::hypot(b.x - a.x, b.y - a.y);
            walls.push_back({g, len});
            s.wall_length += len;
            s.wall_area += len * h;
            s.counts["walls"]++;
        } else if (kind == 1) {
            double x = grid(0, 30), y = grid(0, 30), w = grid(1, 10), d = grid(1, 10);
            Polygon2 poly = rng() % 2 ? Polygon2({{x, y}, {x + w, y}, {x + w, y + d}, {x, y + d}})
                                      : Polygon2({{x, y}, {x + 2 * w, y}, {x + 2 * w, y + d}, {x + w, y + d},
                                                  {x + w, y + 2 * d}, {x, y + 2 * d}});
            create_slab(s.model, poly, 0.25, grid(0, 6));
            s.slab_area += polygon_area(poly);
            s.counts["slabs"]++;
        } else if (kind == 2) {
            TriMesh cube = extrusion_mesh(Polygon2({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), {0, 0, 1}, grid(1, 2));
            create_mesh_element(s.model, "IfcFurnishingElement", cube, std::nullopt);
            s.counts["furnishings"]++;
        } else {
            const auto& [host, len] = walls[rng() % walls.size()];
            if (len < 1.2)
                continue;
            OpeningParams p;
            p.wall_guid = host;
            p.position_along_axis = len / 2;
            create_door(s.model, p);
            s.counts["doors"]++;
            s.counts["openings"]++;
        }
    }
    for (const auto& [k, v] : s.counts)
        if (k != "openings")
            s.products += v;
    return s;
}

} // namespace testing_support
