#include "ergolab/schema.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ergolab {

namespace {
const char* const kSchemaText =
#include "schema_text.inc"
    ;

bool type_matches(const nlohmann::json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    throw std::logic_error("schema: unknown type '" + type + "'");
}

void validate_node(const nlohmann::json& value, const nlohmann::json& schema,
                   const std::string& pointer) {
    if (schema.contains("enum")) {
        for (const auto& candidate : schema.at("enum"))
            if (value == candidate) return;
        throw std::runtime_error("schema violation at " + pointer + ": value not in enum");
    }
    if (schema.contains("type")) {
        const auto& type = schema.at("type");
        bool ok = false;
        if (type.is_string()) {
            ok = type_matches(value, type.get<std::string>());
        } else {
            for (const auto& t : type)
                if (type_matches(value, t.get<std::string>())) ok = true;
        }
        if (!ok)
            throw std::runtime_error("schema violation at " + pointer + ": wrong type");
    }
    if (schema.contains("minLength") && value.is_string() &&
        value.get<std::string>().size() < schema.at("minLength").get<std::size_t>())
        throw std::runtime_error("schema violation at " + pointer + ": string too short");
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema.at("minimum").get<double>())
        throw std::runtime_error("schema violation at " + pointer + ": below minimum");
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& field : schema.at("required"))
                if (!value.contains(field.get<std::string>()))
                    throw std::runtime_error("schema violation at " + pointer +
                                             ": missing required field '" +
                                             field.get<std::string>() + "'");
        if (schema.contains("properties"))
            for (const auto& [name, subschema] : schema.at("properties").items())
                if (value.contains(name))
                    validate_node(value.at(name), subschema, pointer + "/" + name);
    }
    if (value.is_array() && schema.contains("items")) {
        std::size_t i = 0;
        for (const auto& element : value)
            validate_node(element, schema.at("items"), pointer + "/" + std::to_string(i++));
    }
}
}  // namespace

const std::string& report_schema_text() {
    static const std::string text = kSchemaText;
    return text;
}

const nlohmann::json& report_schema() {
    static const nlohmann::json parsed = nlohmann::json::parse(report_schema_text());
    return parsed;
}

void validate_report(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("kind"))
        throw std::runtime_error("report validation: document has no 'kind' field");
    const std::string kind = doc.at("kind").get<std::string>();
    const auto& defs = report_schema().at("definitions");
    if (!defs.contains(kind))
        throw std::runtime_error("report validation: no schema definition for kind '" +
                                 kind + "'");
    validate_node(doc, defs.at(kind), "#");
}

}  // namespace ergolab
