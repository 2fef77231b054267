#pragma once

// Shared fixtures for the test suites: canned schemas, random store
// generators, and a scratch directory helper.

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "epimem/engine.hpp"
#include "epimem/event_log.hpp"
#include "epimem/feature_space.hpp"

namespace epimem::testutil {

/// obj: shape/color/size over small unit-step ranges; rel: one predicate
/// dimension, binary. Matches what the gridworld emits.
inline std::shared_ptr<const SchemaRegistry> grid_registry() {
    SchemaRegistry reg;
    ClassSchema obj;
    obj.class_id = "obj";
    obj.kind = ClassKind::Object;
    obj.dims = {{"shape", 0.0, 8.0, 1.0}, {"color", 0.0, 8.0, 1.0}, {"size", 0.0, 4.0, 1.0}};
    reg.add(obj);
    ClassSchema rel;
    rel.class_id = "rel";
    rel.kind = ClassKind::Relation;
    rel.arity = 2;
    rel.dims = {{"predicate", 0.0, 4.0, 1.0}};
    reg.add(rel);
    return std::make_shared<const SchemaRegistry>(std::move(reg));
}

/// One object class `pt` with `dims` dimensions over [0,1) at 0.1 steps.
inline std::shared_ptr<const SchemaRegistry> unit_registry(std::size_t dims,
                                                           double resolution = 0.1) {
    SchemaRegistry reg;
    ClassSchema c;
    c.class_id = "pt";
    c.kind = ClassKind::Object;
    for (std::size_t d = 0; d < dims; ++d)
        c.dims.push_back({"d" + std::to_string(d), 0.0, 1.0, resolution});
    reg.add(c);
    return std::make_shared<const SchemaRegistry>(std::move(reg));
}

/// Random object-only frames: per frame, `per_frame` draws from a pool of
/// `pool` distinct bin vectors, so instances recur, decay, and reenter.
inline std::vector<Frame> random_frames(const SchemaRegistry& reg, const std::string& class_id,
                                        std::mt19937_64& rng, std::size_t frame_count,
                                        std::size_t per_frame, std::size_t pool) {
    const ClassSchema& schema = reg.get(class_id);
    std::vector<std::vector<double>> pool_raw;
    for (std::size_t p = 0; p < pool; ++p) {
        std::vector<double> raw;
        for (const DimensionSpec& d : schema.dims) {
            Bin b = static_cast<Bin>(rng() % d.bin_count());
            raw.push_back(d.bin_center(b));
        }
        pool_raw.push_back(std::move(raw));
    }
    std::vector<Frame> frames;
    for (std::size_t t = 0; t < frame_count; ++t) {
        Frame f;
        f.tick = t;
        for (std::size_t i = 0; i < per_frame; ++i) {
            EventItem item;
            item.class_id = class_id;
            item.raw = pool_raw[rng() % pool_raw.size()];
            f.items.push_back(std::move(item));
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

/// Fresh scratch directory under the system temp dir; removed on destruction.
class ScratchDir {
public:
    ScratchDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path_ = base / ("epimem-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace epimem::testutil
