// SPDX-License-Identifier: Apache-2.0
#include "pofcap/pofield.hpp"

#include <algorithm>
#include <cmath>

#include "pofcap/common.hpp"

namespace pofcap {

namespace {

// Bilinear sample of one channel; zero outside the image.
double sample_bilinear(const TensorF32& t, int channel, double x, double y) {
  const int h = static_cast<int>(t.dims[1]);
  const int w = static_cast<int>(t.dims[2]);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto value = [&](int xi, int yi) -> double {
    if (xi < 0 || yi < 0 || xi >= w || yi >= h) return 0.0;
    return t.at(channel, yi, xi);
  };
  return (1 - fx) * (1 - fy) * value(x0, y0) + fx * (1 - fy) * value(x0 + 1, y0) +
         (1 - fx) * fy * value(x0, y0 + 1) + fx * fy * value(x0 + 1, y0 + 1);
}

}  // namespace

TensorF32 render_confidence(const std::vector<Keypoint2D>& joints2d, int h, int w,
                            double sigma_px) {
  TensorF32 out({static_cast<std::uint32_t>(joints2d.size()), static_cast<std::uint32_t>(h),
                 static_cast<std::uint32_t>(w)});
  const double inv = 1.0 / (2.0 * sigma_px * sigma_px);
  for (std::size_t c = 0; c < joints2d.size(); ++c) {
    if (!joints2d[c].present) continue;
    const double jx = joints2d[c].px.x();
    const double jy = joints2d[c].px.y();
    for (int y = 0; y < h; ++y) {
      const double dy2 = (y - jy) * (y - jy);
      float* row = &out.at(c, y, 0);
      for (int x = 0; x < w; ++x)
        row[x] = static_cast<float>(std::exp(-((x - jx) * (x - jx) + dy2) * inv));
    }
  }
  return out;
}

PofRender render_pof(const std::vector<PofSegment>& segments, int channel_groups, int h,
                     int w, double half_width_px) {
  PofRender out;
  out.pof = TensorF32({static_cast<std::uint32_t>(3 * channel_groups),
                       static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)});
  std::vector<std::uint16_t> counts(static_cast<std::size_t>(channel_groups) * h * w, 0);

  for (std::size_t si = 0; si < segments.size(); ++si) {
    const auto& s = segments[si];
    if (!s.present) continue;
    const Eigen::Vector2d d = s.b - s.a;
    const double len = d.norm();
    if (len < 1e-9) {
      out.degenerate.push_back(static_cast<int>(si));
      continue;
    }
    const Eigen::Vector2d u = d / len;
    const Eigen::Vector2d perp(-u.y(), u.x());
    const Eigen::Vector2d corners[4] = {s.a + half_width_px * perp, s.a - half_width_px * perp,
                                        s.b + half_width_px * perp, s.b - half_width_px * perp};
    double minx = corners[0].x(), maxx = minx, miny = corners[0].y(), maxy = miny;
    for (const auto& c : corners) {
      minx = std::min(minx, c.x());
      maxx = std::max(maxx, c.x());
      miny = std::min(miny, c.y());
      maxy = std::max(maxy, c.y());
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(minx)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(maxx)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(miny)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(maxy)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d rel(x - s.a.x(), y - s.a.y());
        const double along = u.dot(rel);
        if (along < 0.0 || along > len) continue;
        if (std::abs(perp.dot(rel)) > half_width_px) continue;
        for (int c = 0; c < 3; ++c)
          out.pof.at(3 * s.channel + c, y, x) += static_cast<float>(s.dir[c]);
        ++counts[(static_cast<std::size_t>(s.channel) * h + y) * w + x];
      }
    }
  }

  // Average overlapping contributions, then renormalize to unit length.
  for (int g = 0; g < channel_groups; ++g) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::uint16_t n = counts[(static_cast<std::size_t>(g) * h + y) * w + x];
        if (n == 0) continue;
        Eigen::Vector3d v(out.pof.at(3 * g, y, x), out.pof.at(3 * g + 1, y, x),
                          out.pof.at(3 * g + 2, y, x));
        v /= static_cast<double>(n);
        const double norm = v.norm();
        v = norm > 1e-12 ? Eigen::Vector3d(v / norm) : Eigen::Vector3d::Zero();
        for (int c = 0; c < 3; ++c) out.pof.at(3 * g + c, y, x) = static_cast<float>(v[c]);
      }
    }
  }
  return out;
}

PofRender render_pof(const std::vector<Keypoint2D>& joints2d,
                     const std::vector<PartDirection>& orientations, const SkeletonDef& skel,
                     int h, int w, double half_width_px) {
  std::vector<PofSegment> segments;
  segments.reserve(skel.part_count());
  for (int b = 0; b < skel.part_count(); ++b) {
    auto [m, n] = skel.parts[b];
    PofSegment s;
    s.channel = b;
    s.present = orientations[b].present && joints2d[m].present && joints2d[n].present;
    if (s.present) {
      s.a = joints2d[m].px;
      s.b = joints2d[n].px;
      s.dir = orientations[b].dir;
    }
    segments.push_back(s);
  }
  return render_pof(segments, skel.part_count(), h, w, half_width_px);
}

std::vector<Keypoint2D> decode_keypoints(const TensorF32& confidence, double threshold) {
  const int channels = static_cast<int>(confidence.dims[0]);
  const int h = static_cast<int>(confidence.dims[1]);
  const int w = static_cast<int>(confidence.dims[2]);
  std::vector<Keypoint2D> out(channels);
  for (int c = 0; c < channels; ++c) {
    float best = -1.0f;
    int bx = 0, by = 0;
    for (int y = 0; y < h; ++y) {
      const float* row = &confidence.data[(static_cast<std::size_t>(c) * h + y) * w];
      for (int x = 0; x < w; ++x) {
        if (row[x] > best) {  // strict: ties keep the smallest row-major index
          best = row[x];
          bx = x;
          by = y;
        }
      }
    }
    out[c].px = Eigen::Vector2d(bx, by);
    out[c].confidence = best;
    out[c].present = best >= threshold;
  }
  return out;
}

std::vector<PartDirection> decode_orientations(const TensorF32& pof,
                                               const std::vector<Keypoint2D>& keypoints,
                                               const std::vector<std::pair<int, int>>& parts,
                                               double min_norm) {
  std::vector<PartDirection> out(parts.size());
  for (std::size_t b = 0; b < parts.size(); ++b) {
    auto [m, n] = parts[b];
    if (!keypoints[m].present || !keypoints[n].present) continue;
    const Eigen::Vector2d a = keypoints[m].px;
    const Eigen::Vector2d c = keypoints[n].px;
    const double len = (c - a).norm();
    const int samples = static_cast<int>(std::ceil(len)) + 1;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int i = 0; i < samples; ++i) {
      const double f = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
      const Eigen::Vector2d p = a + f * (c - a);
      for (int k = 0; k < 3; ++k)
        sum[k] += sample_bilinear(pof, static_cast<int>(3 * b) + k, p.x(), p.y());
    }
    sum /= samples;
    const double norm = sum.norm();
    if (norm < min_norm) continue;
    out[b].dir = sum / norm;
    out[b].present = true;
  }
  return out;
}

FieldStack flip_horizontal(const FieldStack& fs) {
  FieldStack out;
  out.h = fs.h;
  out.w = fs.w;
  out.confidence = TensorF32(fs.confidence.dims);
  out.pof = TensorF32(fs.pof.dims);
  const int w = fs.w;
  for (std::size_t c = 0; c < fs.confidence.dims[0]; ++c)
    for (int y = 0; y < fs.h; ++y)
      for (int x = 0; x < w; ++x) out.confidence.at(c, y, x) = fs.confidence.at(c, y, w - 1 - x);
  for (std::size_t c = 0; c < fs.pof.dims[0]; ++c) {
    const bool is_x_channel = (c % 3) == 0;
    for (int y = 0; y < fs.h; ++y)
      for (int x = 0; x < w; ++x) {
        const float v = fs.pof.at(c, y, w - 1 - x);
        out.pof.at(c, y, x) = is_x_channel ? -v : v;
      }
  }
  return out;
}

namespace {

nlohmann::json keypoints_to_json(const std::vector<Keypoint2D>& kps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& k : kps)
    arr.push_back({{"x", k.px.x()}, {"y", k.px.y()}, {"c", k.confidence}, {"present", k.present}});
  return arr;
}

std::vector<Keypoint2D> keypoints_from_json(const nlohmann::json& arr) {
  std::vector<Keypoint2D> out;
  for (const auto& j : arr) {
    Keypoint2D k;
    k.px = Eigen::Vector2d(j.at("x").get<double>(), j.at("y").get<double>());
    k.confidence = j.at("c").get<double>();
    k.present = j.at("present").get<bool>();
    out.push_back(k);
  }
  return out;
}

}  // namespace

nlohmann::json observation_to_json(const Observation& obs) {
  nlohmann::json j;
  j["keypoints"] = keypoints_to_json(obs.keypoints);
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& o : obs.orientations)
    dirs.push_back({{"x", o.dir.x()}, {"y", o.dir.y()}, {"z", o.dir.z()}, {"present", o.present}});
  j["orientations"] = dirs;
  j["toes"] = keypoints_to_json(obs.toes);
  j["face"] = keypoints_to_json(obs.face);
  return j;
}

Observation observation_from_json(const nlohmann::json& j) {
  Observation obs;
  obs.keypoints = keypoints_from_json(j.at("keypoints"));
  for (const auto& d : j.at("orientations")) {
    PartDirection o;
    o.dir = Eigen::Vector3d(d.at("x").get<double>(), d.at("y").get<double>(),
                            d.at("z").get<double>());
    o.present = d.at("present").get<bool>();
    obs.orientations.push_back(o);
  }
  obs.toes = keypoints_from_json(j.value("toes", nlohmann::json::array()));
  obs.face = keypoints_from_json(j.value("face", nlohmann::json::array()));
  return obs;
}

}  // namespace pofcap
