#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotrack/geometry.hpp"
#include "cotrack/io_util.hpp"
#include "cotrack/scenario.hpp"

namespace cotrack {

/// AP layout plus the propagation speed the delays were recorded against.
struct Deployment {
    std::vector<APState> aps;
    double c = kSpeedOfLight;
};

/// A replayable measurement trace: deployment, per-step measurement sets,
/// and (when available) the ground-truth trajectories.
///
/// On disk a trace is a directory:
///   deployment.json   AP poses, FoVs, propagation speed
///   measurements.csv  one row per multipath estimate
///   truth.csv         optional ground truth (time_step, ue_id, x, y, z)
struct Trace {
    Deployment deployment;
    std::vector<StepMeasurements> steps; // index == time_step
    std::optional<std::vector<Trajectory>> truth;
};

namespace trace_detail {

inline const std::vector<std::string> kMeasurementHeader = {
    "time_step", "ap_id",         "path_id",     "delay_s",
    "elevation_rad", "azimuth_rad", "c00", "c01", "c02", "c11", "c12", "c22"};

inline const std::vector<std::string> kTruthHeader = {"time_step", "ue_id", "x", "y", "z"};

} // namespace trace_detail

inline nlohmann::json deployment_to_json(const Deployment& dep) {
    nlohmann::json j;
    j["c"] = dep.c;
    j["aps"] = nlohmann::json::array();
    for (const auto& ap : dep.aps) {
        nlohmann::json ja;
        ja["id"] = ap.id;
        ja["position"] = {ap.position.x(), ap.position.y(), ap.position.z()};
        const Mat3& r = ap.orientation.matrix();
        std::vector<double> rot(9);
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) rot[i * 3 + k] = r(i, k);
        ja["rotation"] = rot;
        switch (ap.fov.kind) {
        case FovKind::sector:
            ja["fov"] = {{"kind", "sector"}, {"d_th", ap.fov.d_th}, {"theta_th", ap.fov.theta_th}};
            break;
        case FovKind::sphere:
            ja["fov"] = {{"kind", "sphere"}, {"d_th", ap.fov.d_th}};
            break;
        case FovKind::all:
            ja["fov"] = {{"kind", "all"}};
            break;
        }
        j["aps"].push_back(ja);
    }
    return j;
}

inline Deployment deployment_from_json(const nlohmann::json& j, const std::string& where);

inline void save_trace(const std::filesystem::path& dir, const Trace& trace) {
    std::filesystem::create_directories(dir);
    write_text_file((dir / "deployment.json").string(),
                    deployment_to_json(trace.deployment).dump(2) + "\n");

    std::string csv;
    for (std::size_t i = 0; i < trace_detail::kMeasurementHeader.size(); ++i)
        csv += (i ? "," : "") + trace_detail::kMeasurementHeader[i];
    csv += "\n";
    for (const auto& step : trace.steps) {
        for (const auto& [ap_id, list] : step.per_ap) {
            for (const auto& m : list) {
                csv += std::to_string(m.time_step) + "," + std::to_string(ap_id) + "," +
                       std::to_string(m.path_id) + "," + format_double(m.delay) + "," +
                       format_double(m.elevation) + "," + format_double(m.azimuth);
                const int idx[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
                for (const auto& ij : idx)
                    csv += "," + format_double(m.cov(ij[0], ij[1]));
                csv += "\n";
            }
        }
    }
    write_text_file((dir / "measurements.csv").string(), csv);

    if (trace.truth) {
        std::string truth_csv = "time_step,ue_id,x,y,z\n";
        // row-major over steps keeps the file ordered by time
        std::size_t max_len = 0;
        for (const auto& tr : *trace.truth) max_len = std::max(max_len, tr.positions.size());
        for (std::size_t t = 0; t < max_len; ++t)
            for (const auto& tr : *trace.truth)
                if (t < tr.positions.size())
                    truth_csv += std::to_string(t) + "," + std::to_string(tr.ue_id) + "," +
                                 format_double(tr.positions[t].x()) + "," +
                                 format_double(tr.positions[t].y()) + "," +
                                 format_double(tr.positions[t].z()) + "\n";
        write_text_file((dir / "truth.csv").string(), truth_csv);
    }
}

inline Trace load_trace(const std::filesystem::path& dir) {
    Trace trace;
    const std::string dep_path = (dir / "deployment.json").string();
    nlohmann::json dep_json;
    try {
        dep_json = nlohmann::json::parse(read_text_file(dep_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(dep_path + ": " + e.what());
    }
    trace.deployment = deployment_from_json(dep_json, dep_path);

    std::set<int> known_aps;
    for (const auto& ap : trace.deployment.aps) known_aps.insert(ap.id);

    const std::string meas_path = (dir / "measurements.csv").string();
    CsvTable table = read_csv(meas_path, trace_detail::kMeasurementHeader);
    int max_step = -1;
    std::vector<RangeBearingMeasurement> rows;
    rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        const int row_no = static_cast<int>(r) + 2; // 1-based, header is row 1
        RangeBearingMeasurement m;
        m.time_step = static_cast<int>(parse_int(f[0], csv_context(meas_path, row_no, "time_step")));
        m.ap_id = static_cast<int>(parse_int(f[1], csv_context(meas_path, row_no, "ap_id")));
        m.path_id = static_cast<int>(parse_int(f[2], csv_context(meas_path, row_no, "path_id")));
        m.delay = parse_double(f[3], csv_context(meas_path, row_no, "delay_s"));
        m.elevation = parse_double(f[4], csv_context(meas_path, row_no, "elevation_rad"));
        m.azimuth = parse_double(f[5], csv_context(meas_path, row_no, "azimuth_rad"));
        const double c00 = parse_double(f[6], csv_context(meas_path, row_no, "c00"));
        const double c01 = parse_double(f[7], csv_context(meas_path, row_no, "c01"));
        const double c02 = parse_double(f[8], csv_context(meas_path, row_no, "c02"));
        const double c11 = parse_double(f[9], csv_context(meas_path, row_no, "c11"));
        const double c12 = parse_double(f[10], csv_context(meas_path, row_no, "c12"));
        const double c22 = parse_double(f[11], csv_context(meas_path, row_no, "c22"));
        m.cov << c00, c01, c02, c01, c11, c12, c02, c12, c22;
        if (m.time_step < 0)
            throw ParseError(csv_context(meas_path, row_no, "time_step") + ": must be >= 0");
        if (m.delay < 0.0)
            throw ParseError(csv_context(meas_path, row_no, "delay_s") + ": must be >= 0");
        if (!known_aps.count(m.ap_id))
            throw ParseError(csv_context(meas_path, row_no, "ap_id") + ": AP " +
                             std::to_string(m.ap_id) + " not in deployment");
        max_step = std::max(max_step, m.time_step);
        rows.push_back(std::move(m));
    }
    trace.steps.resize(max_step + 1);
    for (int t = 0; t <= max_step; ++t) trace.steps[t].time_step = t;
    for (auto& m : rows) trace.steps[m.time_step].per_ap[m.ap_id].push_back(std::move(m));

    const std::filesystem::path truth_file = dir / "truth.csv";
    if (std::filesystem::exists(truth_file)) {
        const std::string truth_path = truth_file.string();
        CsvTable tt = read_csv(truth_path, trace_detail::kTruthHeader);
        std::map<int, std::map<int, Vec3>> by_ue; // ue_id -> time_step -> pos
        for (std::size_t r = 0; r < tt.rows.size(); ++r) {
            const auto& f = tt.rows[r];
            const int row_no = static_cast<int>(r) + 2;
            const int t = static_cast<int>(parse_int(f[0], csv_context(truth_path, row_no, "time_step")));
            const int ue = static_cast<int>(parse_int(f[1], csv_context(truth_path, row_no, "ue_id")));
            Vec3 p(parse_double(f[2], csv_context(truth_path, row_no, "x")),
                   parse_double(f[3], csv_context(truth_path, row_no, "y")),
                   parse_double(f[4], csv_context(truth_path, row_no, "z")));
            if (t < 0)
                throw ParseError(csv_context(truth_path, row_no, "time_step") + ": must be >= 0");
            if (!by_ue[ue].emplace(t, p).second)
                throw ParseError(csv_context(truth_path, row_no, "time_step") +
                                 ": duplicate (time_step, ue_id)");
        }
        std::vector<Trajectory> truth;
        for (const auto& [ue, series] : by_ue) {
            Trajectory tr;
            tr.ue_id = ue;
            int expect = 0;
            for (const auto& [t, p] : series) {
                if (t != expect++)
                    throw ParseError(truth_path + ": ue " + std::to_string(ue) +
                                     " has non-contiguous time steps");
                tr.positions.push_back(p);
            }
            truth.push_back(std::move(tr));
        }
        trace.truth = std::move(truth);
    }
    return trace;
}

inline Deployment deployment_from_json(const nlohmann::json& j, const std::string& where) {
    Deployment dep;
    if (!j.is_object() || !j.contains("aps") || !j["aps"].is_array())
        throw ParseError(where + ": expected an object with an 'aps' array");
    dep.c = j.value("c", kSpeedOfLight);
    if (!(dep.c > 0.0)) throw ParseError(where + ": c: must be > 0");
    std::set<int> ids;
    for (std::size_t i = 0; i < j["aps"].size(); ++i) {
        const auto& ja = j["aps"][i];
        const std::string ctx = where + ": aps[" + std::to_string(i) + "]";
        APState ap;
        try {
            ap.id = ja.at("id").get<int>();
            const auto pos = ja.at("position");
            ap.position = Vec3(pos.at(0).get<double>(), pos.at(1).get<double>(),
                               pos.at(2).get<double>());
            if (ja.contains("rotation")) {
                const auto rot = ja.at("rotation");
                Mat3 r;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) r(a, b) = rot.at(a * 3 + b).get<double>();
                ap.orientation = Rotation3::from_matrix(r);
            } else if (ja.contains("yaw_pitch_roll")) {
                const auto ypr = ja.at("yaw_pitch_roll");
                ap.orientation = Rotation3::from_yaw_pitch_roll(
                    ypr.at(0).get<double>(), ypr.at(1).get<double>(), ypr.at(2).get<double>());
            }
            const auto& jf = ja.at("fov");
            const std::string kind = jf.at("kind").get<std::string>();
            if (kind == "sector") {
                ap.fov = {FovKind::sector, jf.at("d_th").get<double>(),
                          jf.at("theta_th").get<double>()};
            } else if (kind == "sphere") {
                ap.fov = {FovKind::sphere, jf.at("d_th").get<double>(), 0.0};
            } else if (kind == "all") {
                ap.fov = {FovKind::all, 0.0, 0.0};
            } else {
                throw ParseError(ctx + ".fov.kind: unknown kind '" + kind + "'");
            }
            validate_fov(ap.fov);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ctx + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        if (!ids.insert(ap.id).second)
            throw ParseError(ctx + ".id: duplicate AP id " + std::to_string(ap.id));
        dep.aps.push_back(std::move(ap));
    }
    return dep;
}

} // namespace cotrack
