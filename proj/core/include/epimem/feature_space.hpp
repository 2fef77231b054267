#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "epimem/types.hpp"

namespace epimem {

/// One axis of a class's feature space. Raw values in [min, max] are
/// quantized into bins of width `resolution`; bin indexes are what the
/// index trees key on.
struct DimensionSpec {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    double resolution = 0.1;

    Bin bin_count() const;
    /// Midpoint of a bin, clamped so it never exceeds max. Quantizing a
    /// bin center always yields the same bin back.
    double bin_center(Bin bin) const;
    void validate() const;
};

enum class ClassKind : std::uint8_t { Object, Relation };

const char* class_kind_name(ClassKind kind);

struct ClassSchema {
    std::string class_id;
    ClassKind kind = ClassKind::Object;
    std::vector<DimensionSpec> dims;  // declaration order is fixed; index layout depends on it
    std::uint32_t arity = 0;          // participant slots; 0 for objects, >= 1 for relations

    void validate() const;
    /// Position of a named dimension; throws DataError if absent.
    std::size_t dim_index(const std::string& name) const;
};

/// A quantized observation: the raw values plus their per-dimension bins.
/// For a validly constructed vector, bins[d] == quantize(raw[d], dims[d]).
struct FeatureVector {
    std::string class_id;
    std::vector<double> raw;
    std::vector<Bin> bins;

    bool operator==(const FeatureVector&) const = default;
};

/// Maps a raw value to its bin. Total and deterministic on [min, max];
/// values equal to max clamp into the last bin. Out-of-range values throw
/// a DataError naming the dimension.
Bin quantize(double value, const DimensionSpec& spec);

FeatureVector make_vector(const ClassSchema& schema, std::span<const double> raw);

/// Vector positioned at the given bins; raw values are the bin centers.
FeatureVector vector_from_bins(const ClassSchema& schema, std::span<const Bin> bins);

/// Element-wise |a.bins[d] - b.bins[d]|. Both vectors must share a class.
std::vector<Bin> bin_distance(const FeatureVector& a, const FeatureVector& b);

/// Immutable collection of class schemas, declared up front in a config
/// file. Classes are kept sorted by id so every traversal is deterministic.
///
/// File format, line oriented, `#` comments:
///
///     class <id> kind=<object|relation> arity=<n>
///     dim <name> min=<real> max=<real> resolution=<real>
///
/// Each `dim` line attaches to the most recent `class` line.
class SchemaRegistry {
public:
    SchemaRegistry() = default;

    void add(ClassSchema schema);

    const ClassSchema& get(const std::string& class_id) const;
    const ClassSchema* find(const std::string& class_id) const;
    bool contains(const std::string& class_id) const { return find(class_id) != nullptr; }
    std::size_t size() const { return classes_.size(); }
    const std::map<std::string, ClassSchema>& classes() const { return classes_; }

    /// Stable digest over every class and dimension (IEEE bit patterns, not
    /// text). Store files record it so a store cannot be opened against the
    /// wrong schema.
    std::uint64_t digest() const;

    static SchemaRegistry parse(std::istream& in, const std::string& origin);
    static SchemaRegistry load_file(const std::string& path);

private:
    std::map<std::string, ClassSchema> classes_;
};

/// Checks every FeatureVector invariant against the registry; throws
/// DataError on the first violation.
void validate_vector(const SchemaRegistry& reg, const FeatureVector& v);

}  // namespace epimem
