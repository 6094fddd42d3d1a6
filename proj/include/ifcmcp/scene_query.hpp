#pragma once

#include "ifcmcp/json_util.hpp"
#include "ifcmcp/model.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace ifcmcp {

inline constexpr std::int64_t kDefaultSceneLimit = 200;

/// Project, sites, buildings, storeys, then products in creation order, then
/// type objects.
std::vector<EntityId> scene_order(const IfcModel& model);

/// {"name","type","location","visible","selected","guid","ifc_class"}.
Json object_summary(const IfcModel& model, EntityId id);

/// Paged listing: {"count","total","offset","limit","objects"}.
/// Throws InvalidParams for offset < 0 or limit < 1.
Json get_scene_info(const IfcModel& model, std::int64_t offset = 0,
                    std::int64_t limit = kDefaultSceneLimit);

/// Detailed record of one rooted entity. Throws UnknownGuid.
Json get_object_info(const IfcModel& model, std::string_view guid);

/// Class counts, storeys, floor area and overall bounds.
Json get_ifc_scene_overview(const IfcModel& model);

/// Throws UnknownGuid, NotADoor.
Json get_door_properties(const IfcModel& model, std::string_view guid);

/// World bounds of the product body, or of its placement origin.
Bounds3 product_bounds(const IfcModel& model, EntityId id);

/// Filler elements (doors, windows) hosted by a wall, with their openings.
struct HostedElement {
    EntityId opening = 0;
    std::optional<EntityId> filler;
};
std::vector<HostedElement> hosted_openings(const IfcModel& model, EntityId wall);
/// Host wall of a door or window.
std::optional<EntityId> host_of(const IfcModel& model, EntityId filler);
std::optional<EntityId> opening_of(const IfcModel& model, EntityId filler);

} // namespace ifcmcp
