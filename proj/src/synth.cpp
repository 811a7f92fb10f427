#include "pedtrack/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "pedtrack/config.hpp"
#include "pedtrack/features.hpp"

namespace pedtrack {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("synth: " + msg); }

std::vector<std::string> split(const std::string& value, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t end = value.find(sep, start);
        if (end == std::string::npos) end = value.size();
        std::size_t a = start;
        std::size_t b = end;
        while (a < b && std::isspace(static_cast<unsigned char>(value[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(value[b - 1]))) --b;
        if (b > a) out.push_back(value.substr(a, b - a));
        start = end + 1;
    }
    return out;
}

Rgb parse_rgb(const std::string& key, const std::string& value) {
    const std::vector<std::string> parts = split(value, ',');
    if (parts.size() != 3) fail("key '" + key + "': expected 'R,G,B'");
    Rgb rgb;
    std::uint8_t* channels[3] = {&rgb.r, &rgb.g, &rgb.b};
    for (int c = 0; c < 3; ++c) {
        const long v = parse_long(key, parts[static_cast<std::size_t>(c)]);
        if (v < 0 || v > 255) fail("key '" + key + "': channel out of range 0..255");
        *channels[c] = static_cast<std::uint8_t>(v);
    }
    return rgb;
}

std::vector<Waypoint> parse_waypoints(const std::string& key, const std::string& value) {
    std::vector<Waypoint> out;
    for (const std::string& token : split(value, ';')) {
        const std::vector<std::string> parts = split(token, ',');
        if (parts.size() != 3) fail("key '" + key + "': expected 'frame,x,y' triples");
        Waypoint wp;
        wp.frame = static_cast<int>(parse_long(key, parts[0]));
        wp.x = parse_double(key, parts[1]);
        wp.y = parse_double(key, parts[2]);
        out.push_back(wp);
    }
    return out;
}

struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// Interpolated position at frame t, defined only inside the waypoint span.
PointD actor_position(const Actor& actor, int t) {
    const std::vector<Waypoint>& wp = actor.waypoints;
    for (std::size_t s = 0; s + 1 < wp.size(); ++s) {
        if (t < wp[s].frame || t > wp[s + 1].frame) continue;
        const double span = static_cast<double>(wp[s + 1].frame - wp[s].frame);
        const double u = span > 0.0 ? static_cast<double>(t - wp[s].frame) / span : 0.0;
        return {wp[s].x + u * (wp[s + 1].x - wp[s].x), wp[s].y + u * (wp[s + 1].y - wp[s].y)};
    }
    return {wp.front().x, wp.front().y};
}

bool in_span(const Actor& actor, int t) {
    return t >= actor.waypoints.front().frame && t <= actor.waypoints.back().frame;
}

}  // namespace

SceneScript load_scene_script(const std::filesystem::path& path) {
    SceneScript script;
    bool scene_seen = false;

    for (const ConfigSection& section : parse_config_file(path)) {
        if (section.name == "scene") {
            if (scene_seen) fail(path.string() + ": duplicate [scene] section");
            scene_seen = true;
            for (const ConfigEntry& e : section.entries) {
                if (e.key == "width") script.width = static_cast<int>(parse_long(e.key, e.value));
                else if (e.key == "height") script.height = static_cast<int>(parse_long(e.key, e.value));
                else if (e.key == "frames") script.num_frames = static_cast<int>(parse_long(e.key, e.value));
                else if (e.key == "background") script.background = parse_rgb(e.key, e.value);
                else if (e.key == "noise_amplitude") {
                    script.noise_amplitude = static_cast<int>(parse_long(e.key, e.value));
                    if (script.noise_amplitude < 0 || script.noise_amplitude > 255) {
                        fail(path.string() + ": noise_amplitude out of range 0..255");
                    }
                } else if (e.key == "visibility_threshold") {
                    script.visibility_threshold = parse_double(e.key, e.value);
                    if (!(script.visibility_threshold > 0.0 && script.visibility_threshold <= 1.0)) {
                        fail(path.string() + ": visibility_threshold out of range (0,1]");
                    }
                } else fail(path.string() + ": unknown key '" + e.key + "' in [scene]");
            }
        } else if (section.name == "actor") {
            Actor actor;
            bool id_seen = false;
            for (const ConfigEntry& e : section.entries) {
                if (e.key == "id") {
                    actor.id = static_cast<int>(parse_long(e.key, e.value));
                    id_seen = true;
                } else if (e.key == "radius") {
                    actor.radius = parse_double(e.key, e.value);
                } else if (e.key == "color") {
                    actor.color = parse_rgb(e.key, e.value);
                } else if (e.key == "waypoints") {
                    actor.waypoints = parse_waypoints(e.key, e.value);
                } else fail(path.string() + ": unknown key '" + e.key + "' in [actor]");
            }
            if (!id_seen) fail(path.string() + ": [actor] without id");
            if (actor.id < 1) fail(path.string() + ": actor ids start at 1");
            if (actor.radius <= 0.0) fail(path.string() + ": actor " + std::to_string(actor.id) +
                                          ": radius must be > 0");
            if (actor.waypoints.empty()) fail(path.string() + ": actor " + std::to_string(actor.id) +
                                              ": no waypoints");
            script.actors.push_back(std::move(actor));
        } else {
            fail(path.string() + ": unknown section [" + section.name + "]");
        }
    }

    if (!scene_seen) fail(path.string() + ": missing [scene] section");
    if (script.width < 1 || script.height < 1) fail(path.string() + ": scene needs width and height >= 1");
    if (script.num_frames < 1) fail(path.string() + ": scene needs frames >= 1");

    std::sort(script.actors.begin(), script.actors.end(),
              [](const Actor& a, const Actor& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < script.actors.size(); ++i) {
        if (script.actors[i].id == script.actors[i + 1].id) {
            fail(path.string() + ": duplicate actor id " + std::to_string(script.actors[i].id));
        }
    }
    for (const Actor& actor : script.actors) {
        for (std::size_t s = 0; s < actor.waypoints.size(); ++s) {
            const Waypoint& wp = actor.waypoints[s];
            if (s > 0 && wp.frame <= actor.waypoints[s - 1].frame) {
                fail(path.string() + ": actor " + std::to_string(actor.id) +
                     ": waypoint frames must be strictly increasing");
            }
            if (wp.x < 0.0 || wp.x >= script.width || wp.y < 0.0 || wp.y >= script.height) {
                fail(path.string() + ": actor " + std::to_string(actor.id) +
                     ": waypoint position outside the scene");
            }
        }
    }
    return script;
}

RenderResult render(const SceneScript& script, int t, std::uint64_t seed) {
    if (t < 0 || t >= script.num_frames) {
        fail("frame index " + std::to_string(t) + " outside 0.." + std::to_string(script.num_frames - 1));
    }

    RenderResult result;
    Frame& frame = result.frame;
    frame.width = script.width;
    frame.height = script.height;
    frame.data.resize(static_cast<std::size_t>(script.width) * script.height * 3);
    for (std::size_t p = 0; p < frame.data.size(); p += 3) {
        frame.data[p] = script.background.r;
        frame.data[p + 1] = script.background.g;
        frame.data[p + 2] = script.background.b;
    }

    // owner of each painted pixel after all discs are drawn (painter's order)
    std::vector<int> owner(static_cast<std::size_t>(script.width) * script.height, -1);
    struct Drawn {
        const Actor* actor;
        PointD pos;
        std::vector<std::size_t> pixels;
    };
    std::vector<Drawn> drawn;

    for (const Actor& actor : script.actors) {
        if (!in_span(actor, t)) continue;
        Drawn d;
        d.actor = &actor;
        d.pos = actor_position(actor, t);
        const double r2 = actor.radius * actor.radius;
        const int x_lo = std::max(0, static_cast<int>(std::floor(d.pos.x - actor.radius)));
        const int x_hi = std::min(script.width - 1, static_cast<int>(std::ceil(d.pos.x + actor.radius)));
        const int y_lo = std::max(0, static_cast<int>(std::floor(d.pos.y - actor.radius)));
        const int y_hi = std::min(script.height - 1, static_cast<int>(std::ceil(d.pos.y + actor.radius)));
        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                const double dx = x - d.pos.x;
                const double dy = y - d.pos.y;
                if (dx * dx + dy * dy > r2) continue;
                const std::size_t p = static_cast<std::size_t>(y) * script.width + x;
                owner[p] = actor.id;
                frame.data[p * 3] = actor.color.r;
                frame.data[p * 3 + 1] = actor.color.g;
                frame.data[p * 3 + 2] = actor.color.b;
                d.pixels.push_back(p);
            }
        }
        drawn.push_back(std::move(d));
    }

    for (const Drawn& d : drawn) {
        std::size_t covered = 0;
        for (std::size_t p : d.pixels) {
            if (owner[p] != d.actor->id) ++covered;
        }
        const double total = static_cast<double>(d.pixels.size());
        TruthEntry entry;
        entry.actor = d.actor->id;
        entry.t = t;
        entry.x = d.pos.x;
        entry.y = d.pos.y;
        entry.visible = total > 0.0 && static_cast<double>(covered) < script.visibility_threshold * total;
        result.truth.push_back(entry);
    }

    if (script.noise_amplitude > 0) {
        SplitMix64 rng;
        rng.state = seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(t) + 1));
        const std::uint64_t spread = 2ull * static_cast<std::uint64_t>(script.noise_amplitude) + 1;
        for (std::uint8_t& value : frame.data) {
            const int delta = static_cast<int>(rng.next() % spread) - script.noise_amplitude;
            value = static_cast<std::uint8_t>(std::clamp(static_cast<int>(value) + delta, 0, 255));
        }
    }
    return result;
}

ScoreReport score(const std::vector<NtyxRecord>& records, const std::vector<TruthEntry>& truth,
                  double match_radius) {
    std::map<int, std::vector<const NtyxRecord*>> samples_by_t;
    for (const NtyxRecord& rec : records) samples_by_t[rec.t].push_back(&rec);
    std::map<int, std::vector<const TruthEntry*>> truth_by_t;

    ScoreReport report;
    for (const TruthEntry& entry : truth) {
        if (!entry.visible) continue;
        ++report.truth_visible;
        truth_by_t[entry.t].push_back(&entry);
    }

    struct Candidate {
        double dist;
        int track_id;
        int actor_id;
        std::size_t sample;
        std::size_t entry;
    };

    std::map<int, int> last_track_of_actor;
    for (const auto& [t, entries] : truth_by_t) {
        const auto it = samples_by_t.find(t);
        if (it == samples_by_t.end()) continue;
        const std::vector<const NtyxRecord*>& samples = it->second;

        std::vector<Candidate> candidates;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            for (std::size_t e = 0; e < entries.size(); ++e) {
                const double dx = samples[s]->x - entries[e]->x;
                const double dy = samples[s]->y - entries[e]->y;
                const double dist = std::sqrt(dx * dx + dy * dy);
                if (dist > match_radius) continue;
                candidates.push_back({dist, samples[s]->n, entries[e]->actor, s, e});
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.track_id != b.track_id) return a.track_id < b.track_id;
            return a.actor_id < b.actor_id;
        });

        std::vector<std::uint8_t> sample_used(samples.size(), 0);
        std::vector<std::uint8_t> entry_used(entries.size(), 0);
        for (const Candidate& c : candidates) {
            if (sample_used[c.sample] || entry_used[c.entry]) continue;
            sample_used[c.sample] = 1;
            entry_used[c.entry] = 1;
            ++report.matched;

            const auto last = last_track_of_actor.find(c.actor_id);
            if (last != last_track_of_actor.end() && last->second != c.track_id) {
                ++report.id_switches;
            }
            last_track_of_actor[c.actor_id] = c.track_id;
        }
    }

    report.accuracy = report.truth_visible > 0
                          ? static_cast<double>(report.matched) / static_cast<double>(report.truth_visible)
                          : 0.0;
    return report;
}

std::string format_score_report(const ScoreReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "visible truth entries: %zu\nmatched samples: %zu\naccuracy: %.4f\nid switches: %d\n",
                  report.truth_visible, report.matched, report.accuracy, report.id_switches);
    return buf;
}

void write_truth_csv(const std::vector<TruthEntry>& truth, const std::filesystem::path& path) {
    std::vector<TruthEntry> sorted = truth;
    std::sort(sorted.begin(), sorted.end(), [](const TruthEntry& a, const TruthEntry& b) {
        if (a.actor != b.actor) return a.actor < b.actor;
        return a.t < b.t;
    });
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open '" + path.string() + "' for writing");
    std::string text = "actor,T,Y,X,visible\n";
    char line[96];
    for (const TruthEntry& entry : sorted) {
        std::snprintf(line, sizeof(line), "%d,%d,%.2f,%.2f,%d\n", entry.actor, entry.t, entry.y, entry.x,
                      entry.visible ? 1 : 0);
        text += line;
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail("failed writing '" + path.string() + "'");
}

namespace {

double cross(PointD o, PointD a, PointD b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(PointD p, PointD q, PointD r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

bool segments_intersect(PointD a, PointD b, PointD c, PointD d) {
    const double d1 = cross(c, d, a);
    const double d2 = cross(c, d, b);
    const double d3 = cross(a, b, c);
    const double d4 = cross(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    if (d1 == 0 && on_segment(c, a, d)) return true;
    if (d2 == 0 && on_segment(c, b, d)) return true;
    if (d3 == 0 && on_segment(a, c, b)) return true;
    if (d4 == 0 && on_segment(a, d, b)) return true;
    return false;
}

}  // namespace

int count_path_crossings(const SceneScript& script) {
    int crossings = 0;
    for (std::size_t i = 0; i < script.actors.size(); ++i) {
        for (std::size_t j = i + 1; j < script.actors.size(); ++j) {
            const std::vector<Waypoint>& wa = script.actors[i].waypoints;
            const std::vector<Waypoint>& wb = script.actors[j].waypoints;
            for (std::size_t s = 0; s + 1 < wa.size(); ++s) {
                for (std::size_t u = 0; u + 1 < wb.size(); ++u) {
                    const PointD a{wa[s].x, wa[s].y};
                    const PointD b{wa[s + 1].x, wa[s + 1].y};
                    const PointD c{wb[u].x, wb[u].y};
                    const PointD d{wb[u + 1].x, wb[u + 1].y};
                    if (segments_intersect(a, b, c, d)) ++crossings;
                }
            }
        }
    }
    return crossings;
}

}  // namespace pedtrack
