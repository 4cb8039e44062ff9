#include "solsel/context.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "solsel/error.hpp"

namespace solsel {

using nlohmann::json;

namespace {

double checked_log(double v, const std::string& field) {
    if (!(v > 0.0)) {
        throw DomainError("context field '" + field + "': log of non-positive value " +
                          std::to_string(v));
    }
    return std::log(v);
}

}  // namespace

const char* transform_name(Transform t) {
    switch (t) {
        case Transform::Identity: return "identity";
        case Transform::Log: return "log";
        case Transform::LogMax: return "log_max";
        case Transform::LogMean: return "log_mean";
    }
    return "identity";
}

Transform parse_transform(const std::string& name) {
    if (name == "identity") return Transform::Identity;
    if (name == "log") return Transform::Log;
    if (name == "log_max") return Transform::LogMax;
    if (name == "log_mean") return Transform::LogMean;
    throw SchemaError("unknown context transform '" + name + "'");
}

ContextSchema::ContextSchema(std::vector<ContextField> fields) : fields_(std::move(fields)) {
    std::set<std::string> names;
    for (const auto& f : fields_) {
        if (f.name.empty()) throw SchemaError("context field without a name");
        if (!names.insert(f.name).second) {
            throw SchemaError("duplicate context field '" + f.name + "'");
        }
        const bool reduction = f.transform == Transform::LogMax || f.transform == Transform::LogMean;
        if (reduction != (f.arity == Arity::Array)) {
            throw SchemaError("context field '" + f.name + "': " + transform_name(f.transform) +
                              (reduction ? " requires array arity" : " requires scalar arity"));
        }
    }
}

ContextSchema ContextSchema::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("context schema is not valid JSON: ") + e.what());
    }
    const json& arr = doc.is_object() ? doc.at("fields") : doc;
    std::vector<ContextField> fields;
    for (const auto& f : arr) {
        ContextField field;
        field.name = f.at("name").get<std::string>();
        field.transform = parse_transform(f.value("transform", std::string("identity")));
        const bool reduction =
            field.transform == Transform::LogMax || field.transform == Transform::LogMean;
        const auto arity = f.value("arity", std::string(reduction ? "array" : "scalar"));
        if (arity != "scalar" && arity != "array") {
            throw SchemaError("context field '" + field.name + "': unknown arity '" + arity + "'");
        }
        field.arity = arity == "array" ? Arity::Array : Arity::Scalar;
        field.source = f.value("source", std::string{});
        fields.push_back(std::move(field));
    }
    return ContextSchema(std::move(fields));
}

std::string ContextSchema::to_json() const {
    json arr = json::array();
    for (const auto& f : fields_) {
        json j{{"name", f.name},
               {"transform", transform_name(f.transform)},
               {"arity", f.arity == Arity::Array ? "array" : "scalar"}};
        if (!f.source.empty()) j["source"] = f.source;
        arr.push_back(std::move(j));
    }
    return json{{"fields", std::move(arr)}}.dump();
}

std::vector<double> build_context(const ContextSchema& schema, const RawContext& raw) {
    std::vector<double> out;
    out.reserve(schema.dimension());
    for (const auto& f : schema.fields()) {
        auto it = raw.find(f.source_key());
        if (it == raw.end()) {
            throw SchemaError("raw context is missing field '" + f.source_key() + "'");
        }
        if (f.arity == Arity::Scalar) {
            const double* v = std::get_if<double>(&it->second);
            if (v == nullptr) throw SchemaError("context field '" + f.name + "' expects a scalar");
            out.push_back(f.transform == Transform::Log ? checked_log(*v, f.name) : *v);
            continue;
        }
        const auto* arr = std::get_if<std::vector<double>>(&it->second);
        if (arr == nullptr || arr->empty()) {
            throw SchemaError("context field '" + f.name + "' expects a non-empty array");
        }
        double reduced = 0.0;
        if (f.transform == Transform::LogMax) {
            reduced = *std::max_element(arr->begin(), arr->end());
        } else {
            reduced = std::accumulate(arr->begin(), arr->end(), 0.0) / static_cast<double>(arr->size());
        }
        for (double v : *arr) checked_log(v, f.name);
        out.push_back(checked_log(reduced, f.name));
    }
    return out;
}

}  // namespace solsel
