#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace solsel {

enum class Transform { Identity, Log, LogMax, LogMean };
enum class Arity { Scalar, Array };

struct ContextField {
    std::string name;
    Transform transform = Transform::Identity;
    Arity arity = Arity::Scalar;
    // Raw feature the field reads; empty means `name`. Lets one raw array feed
    // several reductions (e.g. max and mean of the same Peclet field).
    std::string source;

    const std::string& source_key() const noexcept { return source.empty() ? name : source; }
};

/// Raw simulation features keyed by name. Arrays feed the log_max/log_mean
/// reductions.
using RawValue = std::variant<double, std::vector<double>>;
using RawContext = std::map<std::string, RawValue>;

/// Ordered list of context fields. Construction validates the field set;
/// an empty schema is valid and yields the empty context vector.
class ContextSchema {
public:
    ContextSchema() = default;
    explicit ContextSchema(std::vector<ContextField> fields);

    static ContextSchema from_json(const std::string& text);
    std::string to_json() const;

    const std::vector<ContextField>& fields() const noexcept { return fields_; }
    std::size_t dimension() const noexcept { return fields_.size(); }

private:
    std::vector<ContextField> fields_;
};

/// Applies each field's transform to its raw value, in schema order. log is
/// the natural logarithm. Throws SchemaError on missing or mistyped fields and
/// DomainError on non-positive input to a log transform.
std::vector<double> build_context(const ContextSchema& schema, const RawContext& raw);

const char* transform_name(Transform t);
Transform parse_transform(const std::string& name);

}  // namespace solsel
