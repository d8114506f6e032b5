#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace ergolab {

// The versioned report schema, byte-identical to schemas/ergolab_reports.schema.json
// (a unit test pins the two together).
const std::string& report_schema_text();
const nlohmann::json& report_schema();

// Validates a report document against the schema definition selected by its
// "kind" field. Supports the subset of JSON Schema the definitions use:
// type, required, properties, items, enum, minimum. Throws with the JSON
// pointer of the first violation.
void validate_report(const nlohmann::json& doc);

}  // namespace ergolab
