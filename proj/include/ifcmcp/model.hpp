#pragma once

#include "ifcmcp/geometry.hpp"
#include "ifcmcp/guid.hpp"
#include "ifcmcp/step.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ifcmcp {

/// "IFCBUILDINGSTOREY" -> "IfcBuildingStorey".
std::string display_class_name(std::string_view upper);
/// Accepts either spelling; returns the STEP (upper-case) form.
std::string step_class_name(std::string_view name);

bool is_rooted_class(std::string_view upper);
bool is_spatial_class(std::string_view upper);
bool is_relationship_class(std::string_view upper);
bool is_type_class(std::string_view upper);

struct SessionFlags {
    bool visible = true;
    bool selected = false;
};

struct PropertyValue {
    std::string name;
    /// Plain scalar (real, integer, string, boolean) or an already typed value.
    StepValue value;
    std::optional<std::string> unit;
};

struct PropertySpec {
    std::string pset_name;
    std::vector<PropertyValue> properties;
};

struct AttributeChange {
    std::string name;
    StepValue old_value;
    StepValue new_value;
};

/// Property as read back from a property set.
struct PropertyReading {
    std::string name;
    StepValue value; // unwrapped scalar
    std::string value_type;
    std::optional<std::string> unit;
};

struct PropertySetReading {
    std::string name;
    std::string guid;
    std::vector<PropertyReading> properties;
};

struct ClassificationReading {
    std::string system;
    std::string code;
    std::string name;
    std::string relation_guid;
};

/// Entity graph with class/GUID indexes and the per-session display flags.
class IfcModel {
public:
    /// Project, site, building and one storey at elevation 0, metre units and
    /// a 3D representation context.
    static IfcModel create(const std::string& project_name, GuidGenerator guids = {});

    /// Adopts a parsed file. Existing GlobalIds are reserved in the generator.
    static IfcModel from_step(StepFile file, GuidGenerator guids = {});

    std::string to_step() const;

    // --- raw graph --------------------------------------------------------
    const EntityMap& entities() const noexcept { return entities_; }
    const StepHeader& header() const noexcept { return header_; }
    StepHeader& header() noexcept { return header_; }
    std::size_t size() const noexcept { return entities_.size(); }

    const EntityInstance* find(EntityId id) const;
    const EntityInstance& get(EntityId id) const;
    bool contains(EntityId id) const { return entities_.count(id) != 0; }

    EntityId add(std::string class_name, std::vector<StepValue> attributes);
    void set_attribute(EntityId id, std::size_t index, StepValue value);
    void remove(EntityId id);

    /// Ascending ids of one class (STEP spelling).
    const std::set<EntityId>& ids_of_class(std::string_view class_name) const;
    const std::map<std::string, std::set<EntityId>, std::less<>>& class_index() const noexcept
    {
        return by_class_;
    }

    std::optional<EntityId> id_of(std::string_view guid) const;
    /// Throws UnknownGuid.
    EntityId require(std::string_view guid) const;
    std::string guid_of(EntityId id) const;
    std::size_t guid_count() const noexcept { return by_guid_.size(); }

    /// Entities whose attributes reference `id`, ascending.
    const std::vector<EntityId>& referrers(EntityId id) const;

    std::string fresh_guid() { return guids_.fresh(); }
    GuidGenerator& guid_generator() noexcept { return guids_; }

    // --- structure --------------------------------------------------------
    EntityId project() const noexcept { return project_; }
    std::optional<EntityId> site() const;
    std::optional<EntityId> building() const;
    /// Storeys ordered by elevation, then id.
    std::vector<EntityId> storeys() const;
    EntityId default_storey() const;
    std::optional<EntityId> representation_context() const;
    /// Sub-context for body geometry; created on first use.
    EntityId body_context();

    bool is_product(EntityId id) const;
    bool is_rooted(EntityId id) const;
    std::vector<EntityId> products() const;
    std::vector<EntityId> type_objects() const;

    std::string name_of(EntityId id) const;
    std::optional<double> storey_elevation(EntityId storey) const;
    /// Storey (or other spatial element) holding the product, if any.
    std::optional<EntityId> container_of(EntityId product) const;
    /// Adds the product to the storey's containment relationship.
    void contain_in(EntityId product, EntityId storey);
    void aggregate(EntityId parent, EntityId child);

    /// World transform of the entity's ObjectPlacement chain.
    Transform world_transform(EntityId product) const;
    Transform placement_transform(EntityId local_placement) const;
    std::optional<EntityId> object_placement(EntityId product) const;

    // --- resource helpers -------------------------------------------------
    EntityId add_point(Vec3 p);
    EntityId add_point2(Vec2 p);
    EntityId add_direction(Vec3 d);
    EntityId add_axis2_placement_3d(const Placement& p);
    EntityId add_axis2_placement_2d(Vec2 origin);
    /// IFCLOCALPLACEMENT whose world transform equals `world`, expressed
    /// relative to `relative_to` when given.
    EntityId add_local_placement(const Placement& world, std::optional<EntityId> relative_to);
    /// Auto-name "{Class}_{NNN}" following the highest existing suffix.
    std::string next_auto_name(std::string_view class_name) const;

    // --- edits ------------------------------------------------------------
    /// Name, Description, ObjectType, LongName or Tag. Throws UnknownGuid,
    /// UnknownAttribute.
    std::vector<AttributeChange> edit_attributes(
        std::string_view guid, const std::vector<std::pair<std::string, StepValue>>& updates);

    /// Returns the pset GUID; merges into a same-named pset on the element.
    std::string add_property_set(std::string_view guid, const PropertySpec& spec);

    /// Returns the IfcRelAssociatesClassification GUID.
    std::string add_classification(std::string_view guid, const std::string& system,
                                   const std::string& code, const std::string& name = {});

    /// Removes the element and everything only it kept alive.
    std::size_t delete_element(std::string_view guid);

    /// All-or-nothing: unknown ids are reported before anything changes.
    std::size_t set_owner_history(const std::vector<std::string>& guids, const std::string& user,
                                  std::int64_t timestamp);

    std::vector<PropertySetReading> property_sets(EntityId id) const;
    std::optional<PropertyReading> property(EntityId id, std::string_view pset,
                                            std::string_view prop) const;
    std::vector<ClassificationReading> classifications(EntityId id) const;

    // --- session state ----------------------------------------------------
    SessionFlags flags(EntityId id) const;
    void set_visible(EntityId id, bool visible);
    void set_selected(EntityId id, bool selected);
    std::vector<EntityId> selection() const;

    bool dirty() const noexcept { return dirty_; }
    void mark_clean() noexcept { dirty_ = false; }
    void mark_dirty() noexcept { dirty_ = true; }
    std::uint64_t revision() const noexcept { return revision_; }

    /// True when the incremental indexes equal a rebuild from the entity map.
    bool indexes_consistent() const;
    std::vector<EntityId> dangling_refs() const { return find_dangling_refs(entities_); }

private:
    struct Indexes {
        std::map<std::string, std::set<EntityId>, std::less<>> by_class;
        std::unordered_map<std::string, EntityId> by_guid;
    };

    void index(const EntityInstance& e);
    void unindex(const EntityInstance& e);
    Indexes rebuild_indexes() const;
    void touch();
    std::optional<std::size_t> attribute_index(const EntityInstance& e,
                                               std::string_view name) const;
    StepValue property_nominal_value(const StepValue& raw) const;
    std::optional<EntityId> unit_for(const std::string& unit);
    EntityId owner_history_for(const std::string& user, std::int64_t timestamp);

    StepHeader header_;
    EntityMap entities_;
    EntityId next_id_ = 1;
    std::map<std::string, std::set<EntityId>, std::less<>> by_class_;
    std::unordered_map<std::string, EntityId> by_guid_;
    EntityId project_ = 0;
    std::map<EntityId, SessionFlags> flags_;
    bool dirty_ = false;
    std::uint64_t revision_ = 0;
    GuidGenerator guids_;

    mutable std::uint64_t referrer_revision_ = ~std::uint64_t{0};
    mutable std::unordered_map<EntityId, std::vector<EntityId>> referrer_cache_;
};

/// Reads and parses an IFC file. Throws IoError, SyntaxError, DanglingRef.
IfcModel load_ifc_file(const std::string& path, GuidGenerator guids = {});
/// Writes the model and marks it clean. Throws IoError.
void save_ifc_file(IfcModel& model, const std::string& path);

} // namespace ifcmcp
