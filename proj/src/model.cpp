#include "ifcmcp/model.hpp"

#include "ifcmcp/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <deque>
#include <unordered_set>

namespace ifcmcp {

namespace {

const std::map<std::string, std::string, std::less<>>& display_names()
{
    static const std::map<std::string, std::string, std::less<>> names = [] {
        std::map<std::string, std::string, std::less<>> m;
        for (const char* n : {
                 "IfcProject", "IfcSite", "IfcBuilding", "IfcBuildingStorey", "IfcSpace",
                 "IfcWall", "IfcWallStandardCase", "IfcWallType", "IfcSlab", "IfcSlabType",
                 "IfcRoof", "IfcDoor", "IfcDoorType", "IfcWindow", "IfcWindowType", "IfcStair",
                 "IfcStairFlight", "IfcOpeningElement", "IfcBuildingElementProxy",
                 "IfcFurnishingElement", "IfcFurniture", "IfcColumn", "IfcBeam", "IfcMember",
                 "IfcPlate", "IfcRailing", "IfcCovering", "IfcCurtainWall", "IfcFooting",
                 "IfcRamp", "IfcFlowTerminal", "IfcPropertySet", "IfcPropertySingleValue",
                 "IfcElementQuantity", "IfcRelAggregates", "IfcRelContainedInSpatialStructure",
                 "IfcRelDefinesByProperties", "IfcRelDefinesByType",
                 "IfcRelAssociatesClassification", "IfcRelVoidsElement", "IfcRelFillsElement",
                 "IfcClassification", "IfcClassificationReference", "IfcOwnerHistory",
                 "IfcPerson", "IfcOrganization", "IfcPersonAndOrganization", "IfcApplication",
                 "IfcLocalPlacement", "IfcAxis2Placement3D", "IfcAxis2Placement2D",
                 "IfcCartesianPoint", "IfcDirection", "IfcExtrudedAreaSolid",
                 "IfcRectangleProfileDef", "IfcArbitraryClosedProfileDef", "IfcPolyline",
                 "IfcShapeRepresentation", "IfcProductDefinitionShape", "IfcFacetedBrep",
                 "IfcClosedShell", "IfcFace", "IfcFaceOuterBound", "IfcPolyLoop",
                 "IfcGeometricRepresentationContext", "IfcSIUnit", "IfcUnitAssignment",
                 "IfcContextDependentUnit", "IfcDimensionalExponents", "IfcReal", "IfcInteger",
                 "IfcLabel", "IfcText", "IfcBoolean", "IfcIdentifier", "IfcPositiveLengthMeasure",
                 "IfcLengthMeasure", "IfcAreaMeasure", "IfcThermalTransmittanceMeasure",
                 "IfcMonetaryMeasure", "IfcCountMeasure"}) {
            std::string upper(n);
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            m.emplace(std::move(upper), n);
        }
        return m;
    }();
    return names;
}

const std::set<std::string, std::less<>>& rooted_classes()
{
    static const std::set<std::string, std::less<>> s{
        "IFCPROJECT", "IFCSITE", "IFCBUILDING", "IFCBUILDINGSTOREY", "IFCSPACE", "IFCWALL",
        "IFCWALLSTANDARDCASE", "IFCSLAB", "IFCROOF", "IFCDOOR", "IFCWINDOW", "IFCSTAIR",
        "IFCSTAIRFLIGHT", "IFCOPENINGELEMENT", "IFCBUILDINGELEMENTPROXY", "IFCFURNISHINGELEMENT",
        "IFCFURNITURE", "IFCCOLUMN", "IFCBEAM", "IFCMEMBER", "IFCPLATE", "IFCRAILING",
        "IFCCOVERING", "IFCCURTAINWALL", "IFCFOOTING", "IFCRAMP", "IFCFLOWTERMINAL",
        "IFCFLOWSEGMENT", "IFCPILE", "IFCPROPERTYSET", "IFCELEMENTQUANTITY", "IFCGROUP",
        "IFCZONE", "IFCSYSTEM", "IFCANNOTATION", "IFCGRID", "IFCVIRTUALELEMENT"};
    return s;
}

std::string upper_ascii(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p)
{
    return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

bool list_contains(const StepValue& v, EntityId id)
{
    if (const auto* list = v.as_list())
        for (const auto& item : *list)
            if (item.as_ref() == id)
                return true;
    return false;
}

std::string string_or_empty(const StepValue& v)
{
    if (const auto* s = v.as_string())
        return *s;
    return {};
}

Transform inverse(const Transform& t)
{
    // Rotation columns are orthonormal, so the inverse rotation is the transpose.
    Transform r;
    r.x = {t.x.x, t.y.x, t.z.x};
    r.y = {t.x.y, t.y.y, t.z.y};
    r.z = {t.x.z, t.y.z, t.z.z};
    r.t = r.apply_direction(t.t) * -1.0;
    return r;
}

Placement to_placement(const Transform& t) { return Placement{t.t, t.z, t.x}; }

std::string utc_timestamp()
{
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    return buf;
}

} // namespace

std::string display_class_name(std::string_view upper)
{
    std::string key = upper_ascii(upper);
    const auto& names = display_names();
    if (auto it = names.find(key); it != names.end())
        return it->second;
    if (!starts_with(key, "IFC") || key.size() == 3)
        return std::string(upper);
    std::string out = "Ifc";
    out += key[3];
    for (std::size_t i = 4; i < key.size(); ++i)
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(key[i])));
    return out;
}

std::string step_class_name(std::string_view name) { return upper_ascii(name); }

bool is_relationship_class(std::string_view upper) { return starts_with(upper, "IFCREL"); }
bool is_type_class(std::string_view upper)
{
    return starts_with(upper, "IFC") && ends_with(upper, "TYPE") && upper != "IFCTYPE" && !is_relationship_class(upper);
}
bool is_spatial_class(std::string_view upper)
{
    return upper == "IFCPROJECT" || upper == "IFCSITE" || upper == "IFCBUILDING" ||
           upper == "IFCBUILDINGSTOREY";
}
bool is_rooted_class(std::string_view upper)
{
    return is_relationship_class(upper) || is_type_class(upper) ||
           rooted_classes().count(upper) != 0;
}

// ---------------------------------------------------------------------------
// Construction

IfcModel IfcModel::create(const std::string& project_name, GuidGenerator guids)
{
    IfcModel m;
    m.guids_ = std::move(guids);
    m.header_.time_stamp = m.guids_.is_seeded() ? "2000-01-01T00:00:00" : utc_timestamp();
    m.header_.originating_system = "ifc-mcp";
    m.header_.preprocessor_version = "ifc-mcp";

    auto S = [](std::string s) { return StepValue::string(std::move(s)); };
    auto U = StepValue::unset();
    auto E = [](std::string s) { return StepValue::enumeration(std::move(s)); };

    m.project_ = m.add("IFCPROJECT", {S(m.fresh_guid()), U, S(project_name), U, U, U, U, U, U});

    std::vector<EntityId> units;
    for (auto [kind, unit] : {std::pair{"LENGTHUNIT", "METRE"}, std::pair{"AREAUNIT", "SQUARE_METRE"},
                              std::pair{"VOLUMEUNIT", "CUBIC_METRE"},
                              std::pair{"PLANEANGLEUNIT", "RADIAN"}})
        units.push_back(m.add("IFCSIUNIT", {StepValue::derived(), E(kind), U, E(unit)}));
    EntityId assignment = m.add("IFCUNITASSIGNMENT", {StepValue::refs(units)});

    EntityId world = m.add_axis2_placement_3d(Placement{});
    EntityId context = m.add("IFCGEOMETRICREPRESENTATIONCONTEXT",
                             {U, S("Model"), StepValue::integer(3), StepValue::real(1e-5),
                              StepValue::ref(world), U});
    m.set_attribute(m.project_, 7, StepValue::refs({context}));
    m.set_attribute(m.project_, 8, StepValue::ref(assignment));

    EntityId site_pl = m.add_local_placement(Placement{}, std::nullopt);
    EntityId site = m.add("IFCSITE", {S(m.fresh_guid()), U, S("My Site"), U, U,
                                      StepValue::ref(site_pl), U, U, E("ELEMENT"), U, U, U, U, U});
    EntityId building_pl = m.add_local_placement(Placement{}, site_pl);
    EntityId building =
        m.add("IFCBUILDING", {S(m.fresh_guid()), U, S("My Building"), U, U,
                              StepValue::ref(building_pl), U, U, E("ELEMENT"), U, U, U});
    EntityId storey_pl = m.add_local_placement(Placement{}, building_pl);
    EntityId storey =
        m.add("IFCBUILDINGSTOREY", {S(m.fresh_guid()), U, S("My Storey"), U, U,
                                    StepValue::ref(storey_pl), U, U, E("ELEMENT"),
                                    StepValue::real(0.0)});
    m.aggregate(m.project_, site);
    m.aggregate(site, building);
    m.aggregate(building, storey);
    m.dirty_ = false;
    return m;
}

IfcModel IfcModel::from_step(StepFile file, GuidGenerator guids)
{
    IfcModel m;
    m.guids_ = std::move(guids);
    m.header_ = std::move(file.header);
    m.entities_ = std::move(file.entities);
    for (const auto& [id, e] : m.entities_) {
        m.index(e);
        m.next_id_ = std::max(m.next_id_, id + 1);
    }
    for (const auto& [guid, id] : m.by_guid_)
        m.guids_.reserve(guid);
    const auto& projects = m.ids_of_class("IFCPROJECT");
    if (!projects.empty())
        m.project_ = *projects.begin();
    return m;
}

std::string IfcModel::to_step() const
{
    StepHeader h = header_;
    h.schema = {"IFC4"};
    return write_step(h, entities_);
}

// ---------------------------------------------------------------------------
// Raw graph

const EntityInstance* IfcModel::find(EntityId id) const
{
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

const EntityInstance& IfcModel::get(EntityId id) const
{
    if (const auto* e = find(id))
        return *e;
    throw Error(ErrorCode::DanglingRef, "no entity #" + std::to_string(id));
}

void IfcModel::touch()
{
    ++revision_;
    dirty_ = true;
}

void IfcModel::index(const EntityInstance& e)
{
    by_class_[e.class_name].insert(e.id);
    bool rooted = is_rooted_class(e.class_name);
    if (!rooted && e.attributes.size() >= 4) {
        // Classes this library does not list: treat a GlobalId-shaped first
        // attribute followed by an OwnerHistory slot as rooted.
        const auto* s = e.attributes[0].as_string();
        rooted = s && is_valid_guid_text(*s) && (e.attributes[1].is_ref() || e.attributes[1].is_unset());
    }
    if (rooted && !e.attributes.empty())
        if (const auto* s = e.attributes[0].as_string())
            by_guid_[*s] = e.id;
}

void IfcModel::unindex(const EntityInstance& e)
{
    if (auto it = by_class_.find(e.class_name); it != by_class_.end()) {
        it->second.erase(e.id);
        if (it->second.empty())
            by_class_.erase(it);
    }
    if (!e.attributes.empty())
        if (const auto* s = e.attributes[0].as_string())
            if (auto it = by_guid_.find(*s); it != by_guid_.end() && it->second == e.id)
                by_guid_.erase(it);
}

IfcModel::Indexes IfcModel::rebuild_indexes() const
{
    IfcModel scratch;
    for (const auto& [id, e] : entities_)
        scratch.index(e);
    return Indexes{std::move(scratch.by_class_), std::move(scratch.by_guid_)};
}

bool IfcModel::indexes_consistent() const
{
    Indexes fresh = rebuild_indexes();
    return fresh.by_class == by_class_ && fresh.by_guid == by_guid_;
}

EntityId IfcModel::add(std::string class_name, std::vector<StepValue> attributes)
{
    EntityId id = next_id_++;
    EntityInstance e{id, std::move(class_name), std::move(attributes)};
    index(e);
    entities_.emplace(id, std::move(e));
    touch();
    return id;
}

void IfcModel::set_attribute(EntityId id, std::size_t index_, StepValue value)
{
    auto it = entities_.find(id);
    if (it == entities_.end())
        throw Error(ErrorCode::DanglingRef, "no entity #" + std::to_string(id));
    auto& e = it->second;
    if (index_ >= e.attributes.size())
        e.attributes.resize(index_ + 1);
    unindex(e);
    e.attributes[index_] = std::move(value);
    index(e);
    touch();
}

void IfcModel::remove(EntityId id)
{
    auto it = entities_.find(id);
    if (it == entities_.end())
        return;
    unindex(it->second);
    entities_.erase(it);
    flags_.erase(id);
    touch();
}

const std::set<EntityId>& IfcModel::ids_of_class(std::string_view class_name) const
{
    static const std::set<EntityId> none;
    auto it = by_class_.find(class_name);
    return it == by_class_.end() ? none : it->second;
}

std::optional<EntityId> IfcModel::id_of(std::string_view guid) const
{
    auto it = by_guid_.find(std::string(guid));
    if (it == by_guid_.end())
        return std::nullopt;
    return it->second;
}

EntityId IfcModel::require(std::string_view guid) const
{
    if (auto id = id_of(guid))
        return *id;
    throw Error(ErrorCode::UnknownGuid, "unknown GUID '" + std::string(guid) + "'");
}

std::string IfcModel::guid_of(EntityId id) const
{
    const auto& e = get(id);
    return e.attributes.empty() ? std::string{} : string_or_empty(e.attributes[0]);
}

const std::vector<EntityId>& IfcModel::referrers(EntityId id) const
{
    if (referrer_revision_ != revision_) {
        referrer_cache_.clear();
        std::vector<EntityId> refs;
        for (const auto& [eid, e] : entities_) {
            refs.clear();
            for (const auto& a : e.attributes)
                collect_refs(a, refs);
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            for (EntityId r : refs)
                referrer_cache_[r].push_back(eid);
        }
        referrer_revision_ = revision_;
    }
    static const std::vector<EntityId> none;
    auto it = referrer_cache_.find(id);
    return it == referrer_cache_.end() ? none : it->second;
}

// ---------------------------------------------------------------------------
// Structure

bool IfcModel::is_rooted(EntityId id) const
{
    const auto* e = find(id);
    if (!e || e->attributes.empty())
        return false;
    const auto* s = e->attributes[0].as_string();
    if (!s)
        return false;
    auto it = by_guid_.find(*s);
    return it != by_guid_.end() && it->second == id;
}

bool IfcModel::is_product(EntityId id) const
{
    if (!is_rooted(id))
        return false;
    const auto& cls = get(id).class_name;
    return !is_relationship_class(cls) && !is_type_class(cls) && !is_spatial_class(cls) &&
           cls != "IFCOPENINGELEMENT" && cls != "IFCPROPERTYSET" && cls != "IFCELEMENTQUANTITY" &&
           cls != "IFCGROUP" && cls != "IFCZONE" && cls != "IFCSYSTEM";
}

std::vector<EntityId> IfcModel::products() const
{
    std::vector<EntityId> out;
    for (const auto& [guid, id] : by_guid_)
        if (is_product(id))
            out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EntityId> IfcModel::type_objects() const
{
    std::vector<EntityId> out;
    for (const auto& [guid, id] : by_guid_)
        if (is_type_class(get(id).class_name))
            out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<EntityId> IfcModel::site() const
{
    const auto& s = ids_of_class("IFCSITE");
    if (s.empty())
        return std::nullopt;
    return *s.begin();
}

std::optional<EntityId> IfcModel::building() const
{
    const auto& s = ids_of_class("IFCBUILDING");
    if (s.empty())
        return std::nullopt;
    return *s.begin();
}

std::optional<double> IfcModel::storey_elevation(EntityId storey) const
{
    const auto* e = find(storey);
    if (!e || e->class_name != "IFCBUILDINGSTOREY")
        return std::nullopt;
    if (auto v = e->attr(9).as_number())
        return v;
    return world_transform(storey).t.z;
}

std::vector<EntityId> IfcModel::storeys() const
{
    const auto& ids = ids_of_class("IFCBUILDINGSTOREY");
    std::vector<EntityId> out(ids.begin(), ids.end());
    std::stable_sort(out.begin(), out.end(), [&](EntityId a, EntityId b) {
        return storey_elevation(a).value_or(0.0) < storey_elevation(b).value_or(0.0);
    });
    return out;
}

EntityId IfcModel::default_storey() const
{
    auto s = storeys();
    if (s.empty())
        throw Error(ErrorCode::UnknownStorey, "model has no building storey");
    return s.front();
}

std::optional<EntityId> IfcModel::representation_context() const
{
    for (EntityId id : ids_of_class("IFCGEOMETRICREPRESENTATIONCONTEXT"))
        return id;
    return std::nullopt;
}

EntityId IfcModel::body_context()
{
    if (auto ctx = representation_context())
        return *ctx;
    EntityId world = add_axis2_placement_3d(Placement{});
    EntityId ctx = add("IFCGEOMETRICREPRESENTATIONCONTEXT",
                       {StepValue::unset(), StepValue::string("Model"), StepValue::integer(3),
                        StepValue::real(1e-5), StepValue::ref(world), StepValue::unset()});
    if (project_ != 0)
        set_attribute(project_, 7, StepValue::refs({ctx}));
    return ctx;
}

std::string IfcModel::name_of(EntityId id) const
{
    const auto* e = find(id);
    if (!e || e->attributes.size() < 3)
        return {};
    return string_or_empty(e->attributes[2]);
}

std::optional<EntityId> IfcModel::container_of(EntityId product) const
{
    for (EntityId r : referrers(product)) {
        const auto& rel = get(r);
        if (rel.class_name == "IFCRELCONTAINEDINSPATIALSTRUCTURE" && list_contains(rel.attr(4), product))
            return rel.attr(5).as_ref();
    }
    // Elements hosted in an opening sit in their host's storey.
    for (EntityId r : referrers(product)) {
        const auto& rel = get(r);
        if (rel.class_name == "IFCRELFILLSELEMENT" && rel.attr(5).as_ref() == product) {
            auto opening = rel.attr(4).as_ref();
            for (EntityId v : opening ? referrers(*opening) : std::vector<EntityId>{}) {
                const auto& voids = get(v);
                if (voids.class_name == "IFCRELVOIDSELEMENT" && voids.attr(5).as_ref() == opening)
                    if (auto host = voids.attr(4).as_ref())
                        return container_of(*host);
            }
        }
    }
    return std::nullopt;
}

void IfcModel::contain_in(EntityId product, EntityId storey)
{
    for (EntityId r : referrers(storey)) {
        const auto& rel = get(r);
        if (rel.class_name == "IFCRELCONTAINEDINSPATIALSTRUCTURE" && rel.attr(5).as_ref() == storey) {
            StepValue list = rel.attr(4);
            if (auto* items = list.as_list()) {
                items->push_back(StepValue::ref(product));
                set_attribute(r, 4, std::move(list));
                return;
            }
        }
    }
    add("IFCRELCONTAINEDINSPATIALSTRUCTURE",
        {StepValue::string(fresh_guid()), StepValue::unset(), StepValue::unset(), StepValue::unset(),
         StepValue::refs({product}), StepValue::ref(storey)});
}

void IfcModel::aggregate(EntityId parent, EntityId child)
{
    for (EntityId r : referrers(parent)) {
        const auto& rel = get(r);
        if (rel.class_name == "IFCRELAGGREGATES" && rel.attr(4).as_ref() == parent) {
            StepValue list = rel.attr(5);
            if (auto* items = list.as_list()) {
                items->push_back(StepValue::ref(child));
                set_attribute(r, 5, std::move(list));
                return;
            }
        }
    }
    add("IFCRELAGGREGATES", {StepValue::string(fresh_guid()), StepValue::unset(), StepValue::unset(),
                             StepValue::unset(), StepValue::ref(parent), StepValue::refs({child})});
}

std::optional<EntityId> IfcModel::object_placement(EntityId product) const
{
    const auto* e = find(product);
    if (!e || e->attributes.size() < 6)
        return std::nullopt;
    auto ref = e->attributes[5].as_ref();
    if (!ref || !contains(*ref))
        return std::nullopt;
    return ref;
}

namespace {

Vec3 read_point(const IfcModel& m, std::optional<EntityId> id, Vec3 fallback)
{
    if (!id || !m.contains(*id))
        return fallback;
    const auto* coords = m.get(*id).attr(0).as_list();
    if (!coords)
        return fallback;
    double c[3] = {0, 0, 0};
    for (std::size_t i = 0; i < coords->size() && i < 3; ++i)
        c[i] = (*coords)[i].as_number().value_or(0.0);
    return {c[0], c[1], c[2]};
}

} // namespace

Transform IfcModel::placement_transform(EntityId local_placement) const
{
    Transform result;
    std::optional<EntityId> current = local_placement;
    // Chains are short in practice; the bound only guards against cycles.
    for (int depth = 0; current && depth < 64; ++depth) {
        const auto* lp = find(*current);
        if (!lp || lp->class_name != "IFCLOCALPLACEMENT")
            break;
        Transform local;
        if (auto axis = lp->attr(1).as_ref(); axis && contains(*axis)) {
            const auto& a = get(*axis);
            Vec3 origin = read_point(*this, a.attr(0).as_ref(), {});
            if (a.class_name == "IFCAXIS2PLACEMENT3D") {
                Vec3 z = read_point(*this, a.attr(1).as_ref(), {0, 0, 1});
                Vec3 x = read_point(*this, a.attr(2).as_ref(), {1, 0, 0});
                try {
                    local = Transform::from(Placement::from_axes(origin, z, x));
                } catch (const Error&) {
                    local.t = origin;
                }
            } else {
                Vec3 x = read_point(*this, a.attr(1).as_ref(), {1, 0, 0});
                local = Transform::from(Placement::from_axes(origin, {0, 0, 1}, {x.x, x.y, 0}));
            }
        }
        result = local.compose(result);
        current = lp->attr(0).as_ref();
    }
    return result;
}

Transform IfcModel::world_transform(EntityId product) const
{
    if (auto pl = object_placement(product))
        return placement_transform(*pl);
    return {};
}

// ---------------------------------------------------------------------------
// Resources

EntityId IfcModel::add_point(Vec3 p)
{
    return add("IFCCARTESIANPOINT", {StepValue::reals({p.x, p.y, p.z})});
}

EntityId IfcModel::add_point2(Vec2 p)
{
    return add("IFCCARTESIANPOINT", {StepValue::reals({p.x, p.y})});
}

EntityId IfcModel::add_direction(Vec3 d)
{
    return add("IFCDIRECTION", {StepValue::reals({d.x, d.y, d.z})});
}

EntityId IfcModel::add_axis2_placement_3d(const Placement& p)
{
    auto near = [](Vec3 a, Vec3 b) { return length(a - b) < 1e-12; };
    EntityId loc = add_point(p.origin);
    bool default_axes = near(p.z_axis, {0, 0, 1}) && near(p.x_axis, {1, 0, 0});
    if (default_axes)
        return add("IFCAXIS2PLACEMENT3D", {StepValue::ref(loc), StepValue::unset(), StepValue::unset()});
    EntityId z = add_direction(p.z_axis);
    EntityId x = add_direction(p.x_axis);
    return add("IFCAXIS2PLACEMENT3D", {StepValue::ref(loc), StepValue::ref(z), StepValue::ref(x)});
}

EntityId IfcModel::add_axis2_placement_2d(Vec2 origin)
{
    return add("IFCAXIS2PLACEMENT2D", {StepValue::ref(add_point2(origin)), StepValue::unset()});
}

EntityId IfcModel::add_local_placement(const Placement& world, std::optional<EntityId> relative_to)
{
    Placement relative = world;
    if (relative_to) {
        Transform parent = placement_transform(*relative_to);
        Transform local = inverse(parent).compose(Transform::from(world));
        relative = to_placement(local);
        // Snap round-off so identity frames serialize as `$`.
        auto snap = [](Vec3 v) {
            for (double* c : {&v.x, &v.y, &v.z})
                if (std::abs(*c) < 1e-12)
                    *c = 0.0;
            return v;
        };
        relative.origin = snap(relative.origin);
        relative.x_axis = snap(relative.x_axis);
        relative.z_axis = snap(relative.z_axis);
    }
    EntityId axis = add_axis2_placement_3d(relative);
    return add("IFCLOCALPLACEMENT",
               {relative_to ? StepValue::ref(*relative_to) : StepValue::unset(), StepValue::ref(axis)});
}

std::string IfcModel::next_auto_name(std::string_view class_name) const
{
    std::string upper = upper_ascii(class_name);
    std::string base = display_class_name(upper).substr(3);
    int highest = 0;
    for (EntityId id : ids_of_class(upper)) {
        std::string name = name_of(id);
        if (name.size() > base.size() + 1 && starts_with(name, base + "_")) {
            std::string digits = name.substr(base.size() + 1);
            if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
                digits.size() < 9)
                highest = std::max(highest, std::stoi(digits));
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03d", highest + 1);
    return base + buf;
}

// ---------------------------------------------------------------------------
// Edits

std::optional<std::size_t> IfcModel::attribute_index(const EntityInstance& e,
                                                     std::string_view name) const
{
    const auto& cls = e.class_name;
    bool rel = is_relationship_class(cls);
    bool type = is_type_class(cls);
    bool pset = cls == "IFCPROPERTYSET" || cls == "IFCELEMENTQUANTITY";
    if (name == "Name")
        return 2;
    if (name == "Description")
        return 3;
    if (rel || pset)
        return std::nullopt;
    if (name == "ObjectType" && !type)
        return 4;
    if (name == "LongName") {
        if (cls == "IFCPROJECT")
            return 5;
        if (is_spatial_class(cls) || cls == "IFCSPACE")
            return 7;
        return std::nullopt;
    }
    if (name == "Tag" && (type || (!is_spatial_class(cls) && cls != "IFCSPACE")))
        return 7;
    return std::nullopt;
}

std::vector<AttributeChange> IfcModel::edit_attributes(
    std::string_view guid, const std::vector<std::pair<std::string, StepValue>>& updates)
{
    EntityId id = require(guid);
    const auto& e = get(id);
    std::vector<std::pair<std::size_t, const std::pair<std::string, StepValue>*>> plan;
    for (const auto& u : updates) {
        auto idx = attribute_index(e, u.first);
        if (!idx)
            throw Error(ErrorCode::UnknownAttribute,
                        "attribute '" + u.first + "' is not editable on " + display_class_name(e.class_name));
        if (!u.second.is_string() && !u.second.is_unset())
            throw Error(ErrorCode::TypeMismatch, "attribute '" + u.first + "' takes a string value");
        plan.emplace_back(*idx, &u);
    }
    std::vector<AttributeChange> changes;
    for (const auto& [idx, u] : plan) {
        changes.push_back({u->first, get(id).attr(idx), u->second});
        set_attribute(id, idx, u->second);
    }
    if (!updates.empty())
        touch();
    return changes;
}

StepValue IfcModel::property_nominal_value(const StepValue& raw) const
{
    const auto& s = raw.storage();
    if (std::holds_alternative<StepValue::Typed>(s))
        return raw;
    if (std::holds_alternative<double>(s))
        return StepValue::typed("IFCREAL", raw);
    if (std::holds_alternative<std::int64_t>(s))
        return StepValue::typed("IFCINTEGER", raw);
    if (std::holds_alternative<std::string>(s))
        return StepValue::typed("IFCLABEL", raw);
    if (std::holds_alternative<bool>(s))
        return StepValue::typed("IFCBOOLEAN", raw);
    if (std::holds_alternative<StepValue::Unset>(s))
        return raw;
    throw Error(ErrorCode::TypeMismatch, "property values must be numbers, strings or booleans");
}

std::optional<EntityId> IfcModel::unit_for(const std::string& unit)
{
    for (EntityId id : ids_of_class("IFCCONTEXTDEPENDENTUNIT"))
        if (string_or_empty(get(id).attr(2)) == unit)
            return id;
    EntityId dims = 0;
    const auto& existing = ids_of_class("IFCDIMENSIONALEXPONENTS");
    if (!existing.empty()) {
        dims = *existing.begin();
    } else {
        std::vector<StepValue> zeros(7, StepValue::integer(0));
        dims = add("IFCDIMENSIONALEXPONENTS", std::move(zeros));
    }
    return add("IFCCONTEXTDEPENDENTUNIT",
               {StepValue::ref(dims), StepValue::enumeration("USERDEFINED"), StepValue::string(unit)});
}

std::string IfcModel::add_property_set(std::string_view guid, const PropertySpec& spec)
{
    EntityId target = require(guid);
    const auto& cls = get(target).class_name;
    if (!is_product(target) && !is_spatial_class(cls) && cls != "IFCOPENINGELEMENT")
        throw Error(ErrorCode::InvalidParams,
                    display_class_name(cls) + " cannot carry property sets");
    if (spec.pset_name.empty() || spec.properties.empty())
        throw Error(ErrorCode::EmptySpec, "property set needs a name and at least one property");
    std::set<std::string> seen;
    std::vector<StepValue> values;
    for (const auto& p : spec.properties) {
        if (p.name.empty())
            throw Error(ErrorCode::EmptySpec, "property names must be non-empty");
        if (!seen.insert(p.name).second)
            throw Error(ErrorCode::InvalidParams, "duplicate property '" + p.name + "'");
        values.push_back(property_nominal_value(p.value));
    }

    std::optional<EntityId> pset;
    for (EntityId r : referrers(target)) {
        const auto& rel = get(r);
        if (rel.class_name != "IFCRELDEFINESBYPROPERTIES" || !list_contains(rel.attr(4), target))
            continue;
        auto def = rel.attr(5).as_ref();
        if (def && contains(*def) && get(*def).class_name == "IFCPROPERTYSET" &&
            name_of(*def) == spec.pset_name) {
            pset = def;
            break;
        }
    }

    auto unit_value = [&](const PropertyValue& p) {
        return p.unit ? StepValue::ref(*unit_for(*p.unit)) : StepValue::unset();
    };

    if (pset) {
        StepValue props = get(*pset).attr(4);
        auto* items = props.as_list();
        if (!items)
            throw Error(ErrorCode::InvalidParams, "property set has no property list");
        for (std::size_t i = 0; i < spec.properties.size(); ++i) {
            const auto& p = spec.properties[i];
            std::optional<EntityId> existing;
            for (const auto& item : *items)
                if (auto pid = item.as_ref();
                    pid && contains(*pid) && string_or_empty(get(*pid).attr(0)) == p.name) {
                    existing = pid;
                    break;
                }
            if (existing && get(*existing).class_name == "IFCPROPERTYSINGLEVALUE") {
                set_attribute(*existing, 2, values[i]);
                set_attribute(*existing, 3, unit_value(p));
            } else {
                EntityId prop = add("IFCPROPERTYSINGLEVALUE", {StepValue::string(p.name), StepValue::unset(),
                                                               values[i], unit_value(p)});
                if (existing) {
                    for (auto& item : *items)
                        if (item.as_ref() == existing)
                            item = StepValue::ref(prop);
                } else {
                    items->push_back(StepValue::ref(prop));
                }
            }
        }
        set_attribute(*pset, 4, std::move(props));
        return guid_of(*pset);
    }

    std::vector<EntityId> props;
    for (std::size_t i = 0; i < spec.properties.size(); ++i) {
        const auto& p = spec.properties[i];
        props.push_back(add("IFCPROPERTYSINGLEVALUE",
                            {StepValue::string(p.name), StepValue::unset(), values[i], unit_value(p)}));
    }
    std::string pset_guid = fresh_guid();
    EntityId new_pset = add("IFCPROPERTYSET", {StepValue::string(pset_guid), StepValue::unset(),
                                               StepValue::string(spec.pset_name), StepValue::unset(),
                                               StepValue::refs(props)});
    add("IFCRELDEFINESBYPROPERTIES",
        {StepValue::string(fresh_guid()), StepValue::unset(), StepValue::unset(), StepValue::unset(),
         StepValue::refs({target}), StepValue::ref(new_pset)});
    return pset_guid;
}

std::string IfcModel::add_classification(std::string_view guid, const std::string& system,
                                         const std::string& code, const std::string& name)
{
    EntityId target = require(guid);
    if (system.empty() || code.empty())
        throw Error(ErrorCode::InvalidParams, "classification system and code must be non-empty");

    std::optional<EntityId> classification;
    for (EntityId id : ids_of_class("IFCCLASSIFICATION"))
        if (string_or_empty(get(id).attr(3)) == system) {
            classification = id;
            break;
        }
    if (!classification) {
        std::vector<StepValue> attrs(7, StepValue::unset());
        attrs[3] = StepValue::string(system);
        classification = add("IFCCLASSIFICATION", std::move(attrs));
    }

    std::optional<EntityId> reference;
    for (EntityId id : ids_of_class("IFCCLASSIFICATIONREFERENCE")) {
        const auto& r = get(id);
        if (r.attr(3).as_ref() == classification && string_or_empty(r.attr(1)) == code) {
            reference = id;
            break;
        }
    }
    if (!reference) {
        std::vector<StepValue> attrs(6, StepValue::unset());
        attrs[1] = StepValue::string(code);
        if (!name.empty())
            attrs[2] = StepValue::string(name);
        attrs[3] = StepValue::ref(*classification);
        reference = add("IFCCLASSIFICATIONREFERENCE", std::move(attrs));
    }

    for (EntityId r : referrers(*reference)) {
        const auto& rel = get(r);
        if (rel.class_name != "IFCRELASSOCIATESCLASSIFICATION" || rel.attr(5).as_ref() != reference)
            continue;
        if (!list_contains(rel.attr(4), target)) {
            StepValue list = rel.attr(4);
            if (auto* items = list.as_list())
                items->push_back(StepValue::ref(target));
            set_attribute(r, 4, std::move(list));
        }
        return guid_of(r);
    }
    std::string rel_guid = fresh_guid();
    add("IFCRELASSOCIATESCLASSIFICATION",
        {StepValue::string(rel_guid), StepValue::unset(), StepValue::unset(), StepValue::unset(),
         StepValue::refs({target}), StepValue::ref(*reference)});
    return rel_guid;
}

std::size_t IfcModel::delete_element(std::string_view guid)
{
    EntityId target = require(guid);
    const std::string cls = get(target).class_name;
    if (is_spatial_class(cls))
        throw Error(ErrorCode::CannotDeleteSpatial,
                    display_class_name(cls) + " belongs to the spatial structure and cannot be deleted");
    if (!is_product(target) && !is_type_class(cls) && cls != "IFCOPENINGELEMENT")
        throw Error(ErrorCode::InvalidParams, display_class_name(cls) + " is not a deletable element");

    std::unordered_set<EntityId> doomed{target};
    std::deque<EntityId> work{target};
    auto doom = [&](EntityId id) {
        if (doomed.insert(id).second)
            work.push_back(id);
    };

    // Openings go with their host and with their filler; fillers go with the
    // host wall too.
    for (EntityId r : referrers(target)) {
        const auto& rel = get(r);
        if (rel.class_name == "IFCRELVOIDSELEMENT" && rel.attr(4).as_ref() == target) {
            if (auto opening = rel.attr(5).as_ref()) {
                doom(*opening);
                for (EntityId f : referrers(*opening)) {
                    const auto& fill = get(f);
                    if (fill.class_name == "IFCRELFILLSELEMENT" && fill.attr(4).as_ref() == opening)
                        if (auto filler = fill.attr(5).as_ref())
                            doom(*filler);
                }
            }
        }
        if (rel.class_name == "IFCRELFILLSELEMENT" && rel.attr(5).as_ref() == target)
            if (auto opening = rel.attr(4).as_ref())
                doom(*opening);
    }

    auto cascades = [&](EntityId id) {
        const auto& e = get(id);
        return !is_rooted(id) || e.class_name == "IFCPROPERTYSET" ||
               e.class_name == "IFCELEMENTQUANTITY" || e.class_name == "IFCOPENINGELEMENT";
    };
    auto all_referrers_doomed = [&](EntityId id) {
        const auto& refs = referrers(id);
        return !refs.empty() &&
               std::all_of(refs.begin(), refs.end(), [&](EntityId r) { return doomed.count(r) != 0; });
    };
    auto relationship_dies = [&](const EntityInstance& rel) {
        for (std::size_t i = 4; i < rel.attributes.size(); ++i) {
            const auto& a = rel.attributes[i];
            if (auto r = a.as_ref(); r && doomed.count(*r))
                return true;
            if (const auto* list = a.as_list()) {
                bool any = false, all = true;
                for (const auto& item : *list)
                    if (auto r = item.as_ref()) {
                        any = true;
                        all = all && doomed.count(*r) != 0;
                    }
                if (any && all)
                    return true;
            }
        }
        return false;
    };

    while (!work.empty()) {
        EntityId id = work.front();
        work.pop_front();
        for (EntityId parent : referrers(id)) {
            if (doomed.count(parent))
                continue;
            const auto& p = get(parent);
            if (is_relationship_class(p.class_name) && relationship_dies(p))
                doom(parent);
            else if (cascades(parent) && all_referrers_doomed(parent))
                doom(parent);
        }
        std::vector<EntityId> children;
        for (const auto& a : get(id).attributes)
            collect_refs(a, children);
        for (EntityId child : children)
            if (!doomed.count(child) && contains(child) && cascades(child) && all_referrers_doomed(child))
                doom(child);
    }

    // Strip references to removed records from the survivors.
    std::set<EntityId> survivors_to_fix;
    for (EntityId id : doomed)
        for (EntityId r : referrers(id))
            if (!doomed.count(r))
                survivors_to_fix.insert(r);
    for (EntityId id : survivors_to_fix) {
        auto attrs = get(id).attributes;
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            auto& a = attrs[i];
            if (auto r = a.as_ref(); r && doomed.count(*r)) {
                set_attribute(id, i, StepValue::unset());
            } else if (auto* list = a.as_list()) {
                auto before = list->size();
                std::erase_if(*list, [&](const StepValue& v) {
                    auto r = v.as_ref();
                    return r && doomed.count(*r);
                });
                if (list->size() != before)
                    set_attribute(id, i, a);
            }
        }
    }
    for (EntityId id : doomed)
        remove(id);
    return doomed.size();
}

EntityId IfcModel::owner_history_for(const std::string& user, std::int64_t timestamp)
{
    auto S = [](std::string s) { return StepValue::string(std::move(s)); };
    auto U = StepValue::unset();

    std::optional<EntityId> person;
    for (EntityId id : ids_of_class("IFCPERSON"))
        if (string_or_empty(get(id).attr(1)) == user) {
            person = id;
            break;
        }
    if (!person)
        person = add("IFCPERSON", {U, S(user), U, U, U, U, U, U});

    std::optional<EntityId> organization;
    for (EntityId id : ids_of_class("IFCORGANIZATION"))
        if (string_or_empty(get(id).attr(1)) == "ifc-mcp") {
            organization = id;
            break;
        }
    if (!organization)
        organization = add("IFCORGANIZATION", {U, S("ifc-mcp"), U, U, U});

    std::optional<EntityId> pao;
    for (EntityId id : ids_of_class("IFCPERSONANDORGANIZATION")) {
        const auto& e = get(id);
        if (e.attr(0).as_ref() == person && e.attr(1).as_ref() == organization) {
            pao = id;
            break;
        }
    }
    if (!pao)
        pao = add("IFCPERSONANDORGANIZATION",
                  {StepValue::ref(*person), StepValue::ref(*organization), U});

    std::optional<EntityId> application;
    for (EntityId id : ids_of_class("IFCAPPLICATION"))
        if (string_or_empty(get(id).attr(3)) == "ifc-mcp") {
            application = id;
            break;
        }
    if (!application)
        application = add("IFCAPPLICATION",
                          {StepValue::ref(*organization), S("1.0"), S("ifc-mcp"), S("ifc-mcp")});

    return add("IFCOWNERHISTORY",
               {StepValue::ref(*pao), StepValue::ref(*application), U,
                StepValue::enumeration("MODIFIED"), StepValue::integer(timestamp), StepValue::ref(*pao),
                StepValue::ref(*application), StepValue::integer(timestamp)});
}

std::size_t IfcModel::set_owner_history(const std::vector<std::string>& guids,
                                        const std::string& user, std::int64_t timestamp)
{
    std::vector<EntityId> ids;
    for (const auto& g : guids)
        ids.push_back(require(g));
    if (ids.empty())
        return 0;
    if (user.empty())
        throw Error(ErrorCode::InvalidParams, "user must be non-empty");
    if (timestamp < 0)
        throw Error(ErrorCode::InvalidParams, "timestamp must be non-negative");
    EntityId history = owner_history_for(user, timestamp);
    std::set<EntityId> unique(ids.begin(), ids.end());
    for (EntityId id : unique)
        set_attribute(id, 1, StepValue::ref(history));
    return unique.size();
}

namespace {

PropertyReading read_property(const IfcModel& m, const EntityInstance& p)
{
    PropertyReading out;
    out.name = string_or_empty(p.attr(0));
    const StepValue& nominal = p.attr(2);
    if (const auto* t = nominal.as_typed()) {
        out.value_type = display_class_name(t->type_name);
        if (!t->inner.empty())
            out.value = t->inner.front();
    } else {
        out.value = nominal;
    }
    if (auto unit = p.attr(3).as_ref(); unit && m.contains(*unit)) {
        const auto& u = m.get(*unit);
        if (u.class_name == "IFCCONTEXTDEPENDENTUNIT" || u.class_name == "IFCCONVERSIONBASEDUNIT")
            out.unit = string_or_empty(u.attr(2));
        else if (u.class_name == "IFCSIUNIT")
            if (const auto* e = u.attr(3).as_enum())
                out.unit = e->name;
    }
    return out;
}

} // namespace

std::vector<PropertySetReading> IfcModel::property_sets(EntityId id) const
{
    std::vector<PropertySetReading> out;
    std::set<EntityId> seen;
    for (EntityId r : referrers(id)) {
        const auto& rel = get(r);
        if (rel.class_name != "IFCRELDEFINESBYPROPERTIES" || !list_contains(rel.attr(4), id))
            continue;
        auto def = rel.attr(5).as_ref();
        if (!def || !contains(*def) || get(*def).class_name != "IFCPROPERTYSET" || !seen.insert(*def).second)
            continue;
        PropertySetReading pset{name_of(*def), guid_of(*def), {}};
        if (const auto* items = get(*def).attr(4).as_list())
            for (const auto& item : *items)
                if (auto pid = item.as_ref(); pid && contains(*pid) &&
                                              get(*pid).class_name == "IFCPROPERTYSINGLEVALUE")
                    pset.properties.push_back(read_property(*this, get(*pid)));
        out.push_back(std::move(pset));
    }
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        return *id_of(a.guid) < *id_of(b.guid);
    });
    return out;
}

std::optional<PropertyReading> IfcModel::property(EntityId id, std::string_view pset,
                                                  std::string_view prop) const
{
    for (const auto& p : property_sets(id))
        if (p.name == pset)
            for (const auto& v : p.properties)
                if (v.name == prop)
                    return v;
    return std::nullopt;
}

std::vector<ClassificationReading> IfcModel::classifications(EntityId id) const
{
    std::vector<ClassificationReading> out;
    for (EntityId r : referrers(id)) {
        const auto& rel = get(r);
        if (rel.class_name != "IFCRELASSOCIATESCLASSIFICATION" || !list_contains(rel.attr(4), id))
            continue;
        auto ref = rel.attr(5).as_ref();
        if (!ref || !contains(*ref))
            continue;
        ClassificationReading c;
        c.relation_guid = guid_of(r);
        const auto& reference = get(*ref);
        if (reference.class_name == "IFCCLASSIFICATIONREFERENCE") {
            c.code = string_or_empty(reference.attr(1));
            c.name = string_or_empty(reference.attr(2));
            std::optional<EntityId> source = reference.attr(3).as_ref();
            for (int depth = 0; source && contains(*source) && depth < 16; ++depth) {
                const auto& s = get(*source);
                if (s.class_name == "IFCCLASSIFICATION") {
                    c.system = string_or_empty(s.attr(3));
                    break;
                }
                source = s.attr(3).as_ref();
            }
        } else if (reference.class_name == "IFCCLASSIFICATION") {
            c.system = string_or_empty(reference.attr(3));
        }
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Session state

SessionFlags IfcModel::flags(EntityId id) const
{
    auto it = flags_.find(id);
    return it == flags_.end() ? SessionFlags{} : it->second;
}

void IfcModel::set_visible(EntityId id, bool visible) { flags_[id].visible = visible; }
void IfcModel::set_selected(EntityId id, bool selected) { flags_[id].selected = selected; }

std::vector<EntityId> IfcModel::selection() const
{
    std::vector<EntityId> out;
    for (const auto& [id, f] : flags_)
        if (f.selected && contains(id))
            out.push_back(id);
    return out;
}

IfcModel load_ifc_file(const std::string& path, GuidGenerator guids)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw Error(ErrorCode::IoError, "read failed: " + path);
    return IfcModel::from_step(parse_step(ss.str()), std::move(guids));
}

void save_ifc_file(IfcModel& model, const std::string& path)
{
    std::string text = model.to_step();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    out.close();
    if (!out)
        throw Error(ErrorCode::IoError, "write failed: " + path);
    model.mark_clean();
}

} // namespace ifcmcp
