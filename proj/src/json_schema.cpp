#include "ifcmcp/json_schema.hpp"

namespace ifcmcp {

namespace {

std::string escape_pointer(const std::string& key)
{
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

std::string json_type(const Json& v)
{
    switch (v.type()) {
    case Json::value_t::null: return "null";
    case Json::value_t::boolean: return "boolean";
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned: return "integer";
    case Json::value_t::number_float: return "number";
    case Json::value_t::string: return "string";
    case Json::value_t::array: return "array";
    default: return "object";
    }
}

bool type_matches(const std::string& want, const Json& v)
{
    if (want == "number")
        return v.is_number();
    if (want == "integer") {
        if (v.is_number_integer())
            return true;
        if (v.is_number_float()) {
            double d = v.get<double>();
            return std::isfinite(d) && d == std::floor(d);
        }
        return false;
    }
    return json_type(v) == want;
}

void check(const Json& schema, const Json& v, const std::string& path, std::vector<SchemaViolation>& out)
{
    if (!schema.is_object())
        return;
    const std::string& where = path; // "" is the whole instance

    if (auto t = schema.find("type"); t != schema.end()) {
        bool ok = false;
        std::string wanted;
        if (t->is_string()) {
            ok = type_matches(t->get<std::string>(), v);
            wanted = t->get<std::string>();
        } else if (t->is_array()) {
            for (const auto& alt : *t) {
                ok = ok || type_matches(alt.get<std::string>(), v);
                wanted += (wanted.empty() ? "" : " or ") + alt.get<std::string>();
            }
        }
        if (!ok) {
            out.push_back({where, "expected " + wanted + ", got " + json_type(v)});
            return;
        }
    }

    if (auto e = schema.find("enum"); e != schema.end() && e->is_array()) {
        bool found = false;
        for (const auto& option : *e)
            found = found || option == v;
        if (!found)
            out.push_back({where, "must be one of " + e->dump()});
    }

    if (v.is_number()) {
        double d = v.get<double>();
        if (auto m = schema.find("minimum"); m != schema.end() && d < m->get<double>())
            out.push_back({where, "must be >= " + m->dump()});
        if (auto m = schema.find("maximum"); m != schema.end() && d > m->get<double>())
            out.push_back({where, "must be <= " + m->dump()});
        if (auto m = schema.find("exclusiveMinimum"); m != schema.end() && d <= m->get<double>())
            out.push_back({where, "must be > " + m->dump()});
        if (auto m = schema.find("exclusiveMaximum"); m != schema.end() && d >= m->get<double>())
            out.push_back({where, "must be < " + m->dump()});
    }

    if (v.is_string())
        if (auto m = schema.find("minLength"); m != schema.end() && v.get<std::string>().size() < m->get<std::size_t>())
            out.push_back({where, "must have at least " + m->dump() + " characters"});

    if (v.is_array()) {
        if (auto m = schema.find("minItems"); m != schema.end() && v.size() < m->get<std::size_t>())
            out.push_back({where, "must have at least " + m->dump() + " items"});
        if (auto m = schema.find("maxItems"); m != schema.end() && v.size() > m->get<std::size_t>())
            out.push_back({where, "must have at most " + m->dump() + " items"});
        if (auto items = schema.find("items"); items != schema.end())
            for (std::size_t i = 0; i < v.size(); ++i)
                check(*items, v[i], path + "/" + std::to_string(i), out);
    }

    if (v.is_object()) {
        if (auto req = schema.find("required"); req != schema.end() && req->is_array())
            for (const auto& name : *req)
                if (!v.contains(name.get<std::string>()))
                    out.push_back({path + "/" + escape_pointer(name.get<std::string>()), "is required"});
        if (auto props = schema.find("properties"); props != schema.end() && props->is_object())
            for (const auto& [key, sub] : props->items())
                if (auto it = v.find(key); it != v.end())
                    check(sub, *it, path + "/" + escape_pointer(key), out);
    }
}

} // namespace

std::vector<SchemaViolation> validate_args(const Json& schema, const Json& instance)
{
    std::vector<SchemaViolation> out;
    check(schema, instance, "", out);
    return out;
}

Json violations_json(const std::vector<SchemaViolation>& violations)
{
    Json arr = Json::array();
    for (const auto& v : violations)
        arr.push_back(Json{{"path", v.path}, {"message", v.message}});
    return arr;
}

} // namespace ifcmcp
