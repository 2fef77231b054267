#include "epimem/feature_space.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace epimem {

Bin DimensionSpec::bin_count() const {
    double span = (max - min) / resolution;
    return static_cast<Bin>(std::ceil(span));
}

double DimensionSpec::bin_center(Bin bin) const {
    double c = min + (static_cast<double>(bin) + 0.5) * resolution;
    return c > max ? max : c;
}

void DimensionSpec::validate() const {
    if (name.empty()) throw DataError("dimension has empty name");
    if (!(min < max))
        throw DataError("dimension '" + name + "': min must be < max");
    if (!(resolution > 0.0))
        throw DataError("dimension '" + name + "': resolution must be > 0");
    double span = (max - min) / resolution;
    if (!std::isfinite(span) || span > 1e9)
        throw DataError("dimension '" + name + "': bin count is not finite");
}

const char* class_kind_name(ClassKind kind) {
    return kind == ClassKind::Object ? "object" : "relation";
}

void ClassSchema::validate() const {
    if (class_id.empty()) throw DataError("class has empty id");
    if (dims.empty()) throw DataError("class '" + class_id + "' declares no dimensions");
    std::set<std::string> names;
    for (const auto& d : dims) {
        d.validate();
        if (!names.insert(d.name).second)
            throw DataError("class '" + class_id + "': duplicate dimension '" + d.name + "'");
    }
    if (kind == ClassKind::Object && arity != 0)
        throw DataError("class '" + class_id + "': object classes take no participants");
    if (kind == ClassKind::Relation && arity == 0)
        throw DataError("class '" + class_id + "': relation classes need arity >= 1");
}

std::size_t ClassSchema::dim_index(const std::string& name) const {
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (dims[i].name == name) return i;
    throw DataError("class '" + class_id + "' has no dimension '" + name + "'");
}

Bin quantize(double value, const DimensionSpec& spec) {
    if (!(value >= spec.min && value <= spec.max)) {
        throw DataError("value " + detail::fmt_double(value) + " out of range [" +
                        detail::fmt_double(spec.min) + ", " + detail::fmt_double(spec.max) +
                        "] for dimension '" + spec.name + "'");
    }
    Bin count = spec.bin_count();
    auto bin = static_cast<Bin>(std::floor((value - spec.min) / spec.resolution));
    // max clamps into the last bin instead of opening a new one
    return bin >= count ? count - 1 : bin;
}

FeatureVector make_vector(const ClassSchema& schema, std::span<const double> raw) {
    if (raw.size() != schema.dims.size()) {
        throw DataError("class '" + schema.class_id + "' expects " +
                        std::to_string(schema.dims.size()) + " values, got " +
                        std::to_string(raw.size()));
    }
    FeatureVector v;
    v.class_id = schema.class_id;
    v.raw.assign(raw.begin(), raw.end());
    v.bins.reserve(raw.size());
    for (std::size_t d = 0; d < raw.size(); ++d)
        v.bins.push_back(quantize(raw[d], schema.dims[d]));
    return v;
}

FeatureVector vector_from_bins(const ClassSchema& schema, std::span<const Bin> bins) {
    if (bins.size() != schema.dims.size()) {
        throw DataError("class '" + schema.class_id + "' expects " +
                        std::to_string(schema.dims.size()) + " bins, got " +
                        std::to_string(bins.size()));
    }
    std::vector<double> raw;
    raw.reserve(bins.size());
    for (std::size_t d = 0; d < bins.size(); ++d) {
        if (bins[d] >= schema.dims[d].bin_count())
            throw DataError("bin " + std::to_string(bins[d]) + " out of range for dimension '" +
                            schema.dims[d].name + "'");
        raw.push_back(schema.dims[d].bin_center(bins[d]));
    }
    return make_vector(schema, raw);
}

std::vector<Bin> bin_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.class_id != b.class_id)
        throw DataError("bin_distance across classes '" + a.class_id + "' and '" + b.class_id + "'");
    if (a.bins.size() != b.bins.size())
        throw DataError("bin_distance on vectors of different arity");
    std::vector<Bin> out(a.bins.size());
    for (std::size_t d = 0; d < a.bins.size(); ++d)
        out[d] = a.bins[d] > b.bins[d] ? a.bins[d] - b.bins[d] : b.bins[d] - a.bins[d];
    return out;
}

void SchemaRegistry::add(ClassSchema schema) {
    schema.validate();
    std::string id = schema.class_id;
    if (!classes_.emplace(id, std::move(schema)).second)
        throw DataError("duplicate class '" + id + "'");
}

const ClassSchema& SchemaRegistry::get(const std::string& class_id) const {
    auto it = classes_.find(class_id);
    if (it == classes_.end()) throw DataError("unknown class '" + class_id + "'");
    return it->second;
}

const ClassSchema* SchemaRegistry::find(const std::string& class_id) const {
    auto it = classes_.find(class_id);
    return it == classes_.end() ? nullptr : &it->second;
}

namespace {

void digest_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
}

void digest_double(std::uint64_t& h, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    digest_bytes(h, &bits, sizeof bits);
}

}  // namespace

std::uint64_t SchemaRegistry::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [id, schema] : classes_) {
        digest_bytes(h, id.data(), id.size());
        unsigned char kind = schema.kind == ClassKind::Object ? 0 : 1;
        digest_bytes(h, &kind, 1);
        digest_bytes(h, &schema.arity, sizeof schema.arity);
        for (const auto& d : schema.dims) {
            digest_bytes(h, d.name.data(), d.name.size());
            digest_double(h, d.min);
            digest_double(h, d.max);
            digest_double(h, d.resolution);
        }
    }
    return h;
}

SchemaRegistry SchemaRegistry::parse(std::istream& in, const std::string& origin) {
    SchemaRegistry reg;
    ClassSchema current;
    bool open = false;
    std::size_t lineno = 0;
    std::string line;

    auto flush = [&](std::size_t at) {
        if (!open) return;
        try {
            reg.add(std::move(current));
        } catch (const DataError& e) {
            detail::fail_at(origin, at, e.what());
        }
        current = {};
        open = false;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;

        if (tokens[0] == "class") {
            flush(lineno);
            if (tokens.size() != 4)
                detail::fail_at(origin, lineno, "expected: class <id> kind=<object|relation> arity=<n>");
            current.class_id = tokens[1];
            for (std::size_t i = 2; i < tokens.size(); ++i) {
                std::string k, v;
                if (!detail::split_kv(tokens[i], k, v))
                    detail::fail_at(origin, lineno, "bad token '" + tokens[i] + "'");
                if (k == "kind") {
                    if (v == "object") current.kind = ClassKind::Object;
                    else if (v == "relation") current.kind = ClassKind::Relation;
                    else detail::fail_at(origin, lineno, "unknown kind '" + v + "'");
                } else if (k == "arity") {
                    if (!detail::parse_u32(v, current.arity))
                        detail::fail_at(origin, lineno, "bad arity '" + v + "'");
                } else {
                    detail::fail_at(origin, lineno, "unknown key '" + k + "'");
                }
            }
            open = true;
        } else if (tokens[0] == "dim") {
            if (!open) detail::fail_at(origin, lineno, "dim line before any class line");
            if (tokens.size() != 5)
                detail::fail_at(origin, lineno, "expected: dim <name> min=<v> max=<v> resolution=<v>");
            DimensionSpec spec;
            spec.name = tokens[1];
            for (std::size_t i = 2; i < tokens.size(); ++i) {
                std::string k, v;
                if (!detail::split_kv(tokens[i], k, v))
                    detail::fail_at(origin, lineno, "bad token '" + tokens[i] + "'");
                double num = 0.0;
                if (!detail::parse_double(v, num))
                    detail::fail_at(origin, lineno, "bad number '" + v + "'");
                if (k == "min") spec.min = num;
                else if (k == "max") spec.max = num;
                else if (k == "resolution") spec.resolution = num;
                else detail::fail_at(origin, lineno, "unknown key '" + k + "'");
            }
            current.dims.push_back(std::move(spec));
        } else {
            detail::fail_at(origin, lineno, "unknown directive '" + tokens[0] + "'");
        }
    }
    flush(lineno);
    if (reg.size() == 0) throw ParseError(origin + ": schema file declares no classes");
    return reg;
}

SchemaRegistry SchemaRegistry::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open schema file");
    return parse(in, path);
}

void validate_vector(const SchemaRegistry& reg, const FeatureVector& v) {
    const ClassSchema& schema = reg.get(v.class_id);
    if (v.raw.size() != schema.dims.size() || v.bins.size() != schema.dims.size())
        throw DataError("vector arity mismatch for class '" + v.class_id + "'");
    for (std::size_t d = 0; d < v.raw.size(); ++d) {
        if (quantize(v.raw[d], schema.dims[d]) != v.bins[d])
            throw DataError("vector bins inconsistent with raw values on dimension '" +
                            schema.dims[d].name + "'");
    }
}

}  // namespace epimem
