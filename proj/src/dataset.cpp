// Copyright 2026 The granucount Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "granucount/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <omp.h>

#include "granucount/error.hpp"
#include "granucount/hash.hpp"
#include "granucount/qa.hpp"
#include "granucount/render.hpp"

namespace granucount {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kFormat = "granucount-dataset/1";

// Stream tags mixed into the global seed.
enum : std::uint64_t { kSplitStream = 1, kPlanStream = 2, kReplaceStream = 3, kQueryStream = 4 };

struct Bucket {
  Split split;
  SceneConfig config;
};
constexpr std::array<Bucket, 4> kBuckets{{{Split::Train, SceneConfig::Normal},
                                          {Split::Train, SceneConfig::Dense},
                                          {Split::TestA, SceneConfig::Normal},
                                          {Split::TestB, SceneConfig::Normal}}};

std::string scene_id_for(LevelTag level, Bucket b, int index) {
  char num[16];
  std::snprintf(num, sizeof num, "%05d", index);
  return std::string(to_string(level)) + "-" + std::string(to_string(b.split)) + "-" + std::string(to_string(b.config)) +
         "-" + num;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + p.string());
}

std::string rel(const fs::path& p) { return p.generic_string(); }

struct Context {
  const GenerationJob& job;
  AssetBank bank;
  SplitAssignment splits;
  fs::path root;
};

struct Planned {
  std::string scene_id;
  LevelTag level;
  Bucket bucket;
  std::uint64_t index;  // global position in the plan
  SceneRecipe recipe;
};

struct SceneOutput {
  bool ok = false;
  SceneEntry entry;
  std::vector<CountQuery> queries;
  std::vector<std::pair<std::string, std::string>> files;
  std::string diagnostic;
};

struct Built {
  SceneRecipe recipe;
  ProfileDraw draw;
  SceneGraph scene;
  CameraPose camera;
  RenderResult frame;
};

std::optional<Built> build_scene(const Context& ctx, const SceneRecipe& recipe, std::string& diagnostic) {
  const auto& job = ctx.job;
  Built b{recipe, draw(effective_profile(job.profile, recipe.config, job.dense), recipe.profile_draw_seed), {}, {}, {}};
  Rng rng(recipe.scene_seed);
  for (int attempt = 0; attempt < job.placement_attempts; ++attempt) {
    try {
      b.scene = place_objects(recipe, ctx.bank, b.draw, rng);
      b.camera = sample_camera(b.draw, b.scene, job.image, rng);
      b.frame = render(b.scene, b.camera);
      const auto counts = pixel_counts(b.frame.ids, b.scene.instances.size());
      if (std::any_of(counts.begin() + 1, counts.end(), [](std::uint32_t c) { return c < kMinVisiblePixels; })) {
        diagnostic = "visibility: an instance has fewer than " + std::to_string(kMinVisiblePixels) + " pixels";
        continue;
      }
      return b;
    } catch (const Error& e) {
      diagnostic = e.what();
    }
  }
  return std::nullopt;
}

nlohmann::json draw_json(const ProfileDraw& d) {
  nlohmann::json j = {{"seed", d.seed}};
  for (std::size_t i = 0; i < kProfileKeyCount; ++i) j[std::string(kProfileKeyNames[i])] = d.values[i];
  return j;
}

SceneOutput run_scene(const Context& ctx, const Planned& plan) {
  SceneOutput out;
  const auto& job = ctx.job;
  std::optional<Built> built;
  int replacement = 0;
  for (; replacement <= job.replacement_recipes; ++replacement) {
    SceneRecipe recipe = plan.recipe;
    if (replacement > 0) {
      Rng rng(derive_seed({job.global_seed, kReplaceStream, plan.index, static_cast<std::uint64_t>(replacement)}));
      recipe = compose_recipe(plan.level, ctx.bank, ctx.splits, plan.bucket.split, plan.bucket.config, job.profile,
                              rng, nullptr, job.dense);
    }
    std::string why;
    built = build_scene(ctx, recipe, why);
    if (built) break;
    out.diagnostic = why;
  }
  if (!built) return out;

  const auto annotations = derive_annotations(built->frame.ids, built->scene, built->camera);
  const auto records = annotations.records();
  Rng qrng(derive_seed({built->recipe.scene_seed, kQueryStream}));
  out.queries = queries_for_scene(plan.scene_id, built->recipe, ctx.bank, records, qrng);

  IdentityEditor editor;
  ReferenceInspector inspector;
  const auto [outcomes, report] =
      run_edit_filter_loop({QaSample{plan.scene_id, built->frame.image, built->frame.ids}}, editor, inspector);
  if (report.accepted.empty()) {
    out.diagnostic = "qa: prototype rejected by the inspector";
    out.queries.clear();
    return out;
  }

  const fs::path dir = fs::path(std::string(to_string(plan.level))) / std::string(to_string(plan.bucket.split)) /
                       plan.scene_id;
  fs::create_directories(ctx.root / dir);
  const nlohmann::json scene_doc = {{"scene_id", plan.scene_id},
                                    {"recipe", to_json(built->recipe)},
                                    {"profile_draw", draw_json(built->draw)},
                                    {"scene", to_json(built->scene)},
                                    {"camera", to_json(built->camera)},
                                    {"qa", to_json(outcomes.front().verdicts.back())}};
  write_ppm(ctx.root / dir / "rgb.ppm", outcomes.front().edited);
  write_pgm16(ctx.root / dir / "ids.pgm", built->frame.ids);
  write_text(ctx.root / dir / "scene.json", scene_doc.dump());
  write_text(ctx.root / dir / "annotations.json", to_json(annotations).dump());
  for (const char* name : {"rgb.ppm", "ids.pgm", "scene.json", "annotations.json"}) {
    out.files.emplace_back(rel(dir / name), sha256_file(ctx.root / dir / name));
  }

  out.ok = true;
  out.entry = {plan.scene_id,
               plan.level,
               plan.bucket.split,
               plan.bucket.config,
               sha256_hex(to_json(built->recipe).dump()),
               replacement,
               built->scene.instances.size(),
               rel(dir),
               {}};
  for (const auto& q : out.queries) out.entry.query_ids.push_back(q.query_id);
  return out;
}

std::vector<Planned> plan_scenes(const Context& ctx) {
  const auto& job = ctx.job;
  std::vector<Planned> plan;
  std::array<CategoryUsage, 3> usage;
  for (auto& u : usage) u.assign(ctx.bank.categories.size(), 0);
  for (auto level : kAllLevels) {
    const auto it = job.counts.find(level);
    if (it == job.counts.end()) continue;
    for (std::size_t b = 0; b < kBuckets.size(); ++b) {
      const auto bucket = kBuckets[b];
      const int n = it->second.v[b];
      if (n < 0) throw Error("negative scene count for " + std::string(to_string(level)));
      Rng rng(derive_seed({job.global_seed, kPlanStream, static_cast<std::uint64_t>(level), b}));
      for (int i = 0; i < n; ++i) {
        auto recipe = compose_recipe(level, ctx.bank, ctx.splits, bucket.split, bucket.config, job.profile, rng,
                                     &usage[static_cast<std::size_t>(bucket.split)], job.dense);
        plan.push_back({scene_id_for(level, bucket, i), level, bucket, plan.size(), std::move(recipe)});
      }
    }
  }
  return plan;
}

nlohmann::json entry_json(const SceneEntry& e) {
  return {{"scene_id", e.scene_id},       {"level", to_string(e.level)},   {"split", to_string(e.split)},
          {"config", to_string(e.config)}, {"recipe_hash", e.recipe_hash}, {"replacement", e.replacement},
          {"instances", e.instances},     {"dir", e.dir},                  {"query_ids", e.query_ids}};
}

int expected_queries(LevelTag l) { return has_distractor(l) ? 2 : 1; }

struct SceneFiles {
  SceneRecipe recipe;
  SceneGraph scene;
  CameraPose camera;
  AnnotationSet annotations;
};

SceneFiles load_scene(const fs::path& dir) {
  const auto doc = read_json(dir / "scene.json");
  SceneFiles f;
  try {
    f.recipe = recipe_from_json(doc.at("recipe"));
    f.scene = scene_from_json(doc.at("scene"));
    f.camera = camera_from_json(doc.at("camera"));
  } catch (const nlohmann::json::exception& e) {
    throw Error((dir / "scene.json").string() + ": " + e.what());
  }
  f.annotations = annotations_from_json(read_json(dir / "annotations.json"));
  return f;
}

}  // namespace

const std::map<LevelTag, LevelCounts>& reference_level_counts() {
  static const std::map<LevelTag, LevelCounts> table{
      {LevelTag::L1, {{16179, 3959, 1087, 1087}}},     {LevelTag::L2Size, {{7582, 2402, 569, 586}}},
      {LevelTag::L2Color, {{8043, 2135, 600, 602}}},   {LevelTag::L3, {{15386, 3624, 1053, 1014}}},
      {LevelTag::L4, {{16493, 4186, 1081, 1081}}},     {LevelTag::L5, {{15825, 3825, 1072, 1036}}},
  };
  return table;
}

std::map<LevelTag, LevelCounts> scaled_reference_counts(double factor) {
  if (!(factor > 0.0)) throw Error("scale factor must be positive");
  std::map<LevelTag, LevelCounts> out;
  for (const auto& [level, c] : reference_level_counts()) {
    LevelCounts s;
    for (std::size_t i = 0; i < 4; ++i) {
      // Tolerate representation error such as 16179 * 0.01 = 161.79000000000002.
      s.v[i] = static_cast<int>(std::ceil(c.v[i] * factor - 1e-9));
    }
    out[level] = s;
  }
  return out;
}

LevelCounts counts_from_train(int train, int test_a, int test_b, double normal_per_dense) {
  if (train < 0 || test_a < 0 || test_b < 0) throw Error("scene counts must be non-negative");
  if (!(normal_per_dense > 0.0)) throw Error("dense ratio must be positive");
  const int dense = static_cast<int>(std::lround(train / (1.0 + normal_per_dense)));
  return {{train - dense, dense, test_a, test_b}};
}

nlohmann::json to_json(const GenerationJob& job) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [level, c] : job.counts) counts[std::string(to_string(level))] = c.v;
  return {{"global_seed", job.global_seed},
          {"bank",
           {{"seed", job.bank.seed},
            {"n_super", job.bank.n_super},
            {"cats_per_super", job.bank.cats_per_super},
            {"types_per_cat", job.bank.types_per_cat},
            {"assets_per_type", job.bank.assets_per_type},
            {"n_backgrounds", job.bank.n_backgrounds}}},
          {"asset_holdout", job.asset_holdout},
          {"category_holdout", job.category_holdout},
          {"counts", counts},
          {"profile", to_json(job.profile)},
          {"dense_scaling", {{"count", job.dense.count}, {"spacing", job.dense.spacing}, {"density", job.dense.density}}},
          {"image_size", {job.image.width, job.image.height}},
          {"placement_attempts", job.placement_attempts},
          {"replacement_recipes", job.replacement_recipes},
          {"max_failure_rate", job.max_failure_rate}};
}

GenerationJob job_from_json(const nlohmann::json& doc) {
  GenerationJob job;
  try {
    job.global_seed = doc.value("global_seed", std::uint64_t{0});
    if (doc.contains("bank")) {
      const auto& b = doc["bank"];
      job.bank.seed = b.value("seed", job.bank.seed);
      job.bank.n_super = b.value("n_super", job.bank.n_super);
      job.bank.cats_per_super = b.value("cats_per_super", job.bank.cats_per_super);
      job.bank.types_per_cat = b.value("types_per_cat", job.bank.types_per_cat);
      job.bank.assets_per_type = b.value("assets_per_type", job.bank.assets_per_type);
      job.bank.n_backgrounds = b.value("n_backgrounds", job.bank.n_backgrounds);
    }
    job.asset_holdout = doc.value("asset_holdout", job.asset_holdout);
    job.category_holdout = doc.value("category_holdout", job.category_holdout);
    for (const auto& [k, v] : doc.at("counts").items()) {
      LevelCounts c;
      c.v = v.get<std::array<int, 4>>();
      job.counts[level_from_string(k)] = c;
    }
    if (doc.contains("profile")) job.profile = load_profile(doc["profile"]);
    if (doc.contains("dense_scaling")) {
      const auto& d = doc["dense_scaling"];
      job.dense = {d.value("count", job.dense.count), d.value("spacing", job.dense.spacing),
                   d.value("density", job.dense.density)};
    }
    if (doc.contains("image_size")) {
      const auto wh = doc["image_size"].get<std::array<int, 2>>();
      job.image = {wh[0], wh[1]};
    }
    job.placement_attempts = doc.value("placement_attempts", job.placement_attempts);
    job.replacement_recipes = doc.value("replacement_recipes", job.replacement_recipes);
    job.max_failure_rate = doc.value("max_failure_rate", job.max_failure_rate);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("job: ") + e.what());
  }
  if (job.image.width < 16 || job.image.height < 16) throw Error("job: image_size must be at least 16x16");
  if (job.placement_attempts < 1) throw Error("job: placement_attempts must be at least 1");
  if (job.replacement_recipes < 0) throw Error("job: replacement_recipes must be non-negative");
  return job;
}


nlohmann::json DatasetManifest::body() const {
  auto scenes_json = nlohmann::json::array();
  for (const auto& e : scenes) scenes_json.push_back(entry_json(e));
  auto failed_json = nlohmann::json::array();
  for (const auto& f : failed) failed_json.push_back({{"scene_id", f.scene_id}, {"diagnostic", f.diagnostic}});
  return {{"format", kFormat},     {"job", job},         {"scenes", scenes_json},
          {"failed", failed_json}, {"queries", queries}, {"files", files}};
}

nlohmann::json to_json(const DatasetManifest& m) {
  auto j = m.body();
  j["content_hash"] = m.content_hash;
  return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& doc) {
  DatasetManifest m;
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw Error("manifest: unsupported format");
    m.job = doc.at("job");
    for (const auto& s : doc.at("scenes")) {
      SceneEntry e;
      e.scene_id = s.at("scene_id").get<std::string>();
      e.level = level_from_string(s.at("level").get<std::string>());
      e.split = split_from_string(s.at("split").get<std::string>());
      e.config = config_from_string(s.at("config").get<std::string>());
      e.recipe_hash = s.at("recipe_hash").get<std::string>();
      e.replacement = s.at("replacement").get<int>();
      e.instances = s.at("instances").get<std::size_t>();
      e.dir = s.at("dir").get<std::string>();
      e.query_ids = s.at("query_ids").get<std::vector<std::string>>();
      m.scenes.push_back(std::move(e));
    }
    for (const auto& f : doc.at("failed")) {
      m.failed.push_back({f.at("scene_id").get<std::string>(), f.at("diagnostic").get<std::string>()});
    }
    m.queries = doc.at("queries").get<std::size_t>();
    m.files = doc.at("files").get<std::map<std::string, std::string>>();
    m.content_hash = doc.at("content_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("manifest: ") + e.what());
  }
  return m;
}

DatasetManifest read_manifest(const fs::path& root) {
  return manifest_from_json(read_json(root / std::string(kManifestName)));
}

DatasetManifest cmd_generate(const GenerationJob& job, const fs::path& root, int jobs, std::ostream* log) {
  if (fs::exists(root) && !fs::is_empty(root)) throw Error("output directory " + root.string() + " is not empty");
  fs::create_directories(root);
  const auto bank = build_bank(job.bank);
  const auto splits =
      assign_splits(bank, derive_seed({job.global_seed, kSplitStream}), job.asset_holdout, job.category_holdout);
  if (const auto v = validate_splits(bank, splits); !v.empty()) throw Error("split assignment invalid: " + v[0].message);
  Context ctx{job, bank, splits, root};
  const auto plan = plan_scenes(ctx);

  std::vector<SceneOutput> results(plan.size());
  std::vector<std::string> crashes(plan.size());
  const auto n = static_cast<std::int64_t>(plan.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      results[k] = run_scene(ctx, plan[k]);
    } catch (const std::exception& e) {
      crashes[k] = e.what();
    }
  }
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (!crashes[k].empty()) throw Error(plan[k].scene_id + ": " + crashes[k]);
  }

  DatasetManifest m;
  m.job = to_json(job);
  write_text(root / "bank.json", to_json(bank).dump());
  write_text(root / "splits.json", to_json(splits).dump());
  m.files["bank.json"] = sha256_file(root / "bank.json");
  m.files["splits.json"] = sha256_file(root / "splits.json");
  std::ostringstream queries;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    auto& r = results[k];
    if (!r.ok) {
      m.failed.push_back({plan[k].scene_id, r.diagnostic});
      if (log) *log << "scene " << plan[k].scene_id << " failed: " << r.diagnostic << '\n';
      continue;
    }
    for (const auto& q : r.queries) queries << to_json(q).dump() << '\n';
    m.queries += r.queries.size();
    for (auto& [path, digest] : r.files) m.files[path] = digest;
    m.scenes.push_back(std::move(r.entry));
  }
  if (static_cast<double>(m.failed.size()) > job.max_failure_rate * static_cast<double>(plan.size())) {
    throw Error(std::to_string(m.failed.size()) + " of " + std::to_string(plan.size()) +
                " scenes failed, above the allowed rate");
  }
  write_text(root / std::string(kQueriesName), queries.str());
  m.files[std::string(kQueriesName)] = sha256_file(root / std::string(kQueriesName));
  m.content_hash = sha256_hex(m.body().dump());

  const auto tmp = root / (std::string(kManifestName) + ".tmp");
  write_text(tmp, to_json(m).dump(1));
  fs::rename(tmp, root / std::string(kManifestName));
  return m;
}

nlohmann::json to_json(const ValidationReport& r) {
  auto v = nlohmann::json::array();
  for (const auto& x : r.violations) v.push_back({{"kind", x.kind}, {"where", x.where}, {"message", x.message}});
  return {{"ok", r.ok()}, {"violations", v}, {"modified_files", r.modified_files}};
}

std::vector<CountQuery> read_queries(const fs::path& root) {
  std::ifstream in(root / std::string(kQueriesName));
  if (!in) throw Error("cannot open " + (root / std::string(kQueriesName)).string());
  std::vector<CountQuery> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    try {
      out.push_back(query_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(std::string(kQueriesName) + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

ValidationReport cmd_validate(const fs::path& root) {
  ValidationReport rep;
  auto add = [&](std::string kind, std::string where, std::string msg) {
    rep.violations.push_back({std::move(kind), std::move(where), std::move(msg)});
  };
  DatasetManifest m;
  try {
    m = read_manifest(root);
  } catch (const Error& e) {
    add("manifest", std::string(kManifestName), e.what());
    return rep;
  }
  if (sha256_hex(m.body().dump()) != m.content_hash) add("manifest", std::string(kManifestName), "content hash mismatch");
  for (const auto& [path, digest] : m.files) {
    if (!fs::exists(root / path)) {
      add("file", path, "missing");
    } else if (sha256_file(root / path) != digest) {
      rep.modified_files.push_back(path);
    }
  }

  AssetBank bank;
  SplitAssignment splits;
  std::vector<CountQuery> queries;
  try {
    bank = bank_from_json(read_json(root / "bank.json"));
    splits = splits_from_json(read_json(root / "splits.json"));
    queries = read_queries(root);
  } catch (const Error& e) {
    add("file", root.string(), e.what());
    return rep;
  }
  for (const auto& v : validate_splits(bank, splits)) add("split", v.kind, v.message);

  std::unordered_map<std::string, std::vector<const CountQuery*>> by_scene;
  for (const auto& q : queries) by_scene[q.scene_id].push_back(&q);
  std::size_t expected_total = 0;
  std::set<std::string> known;

  for (const auto& e : m.scenes) {
    known.insert(e.scene_id);
    expected_total += static_cast<std::size_t>(expected_queries(e.level));
    SceneFiles f;
    InstanceIdMap ids;
    try {
      f = load_scene(root / e.dir);
      ids = read_pgm16(root / e.dir / "ids.pgm");
    } catch (const Error& err) {
      add("file", e.scene_id, err.what());
      continue;
    }
    const auto& r = f.recipe;
    for (const auto& v : recipe_valid(r, bank, splits).violations) add("recipe", e.scene_id, v.code + ": " + v.message);
    if (r.level != e.level || r.split != e.split || r.config != e.config) {
      add("recipe", e.scene_id, "recipe level/split/config disagree with the manifest");
    }
    const auto n = f.annotations.instances.size();
    if (n > static_cast<std::size_t>(kMaxInstances) || f.scene.instances.size() > static_cast<std::size_t>(kMaxInstances)) {
      add("cap", e.scene_id, "more than " + std::to_string(kMaxInstances) + " instances");
    }
    if (n != f.scene.instances.size() || static_cast<int>(n) != r.total_count()) {
      add("cap", e.scene_id, "instance count disagrees between recipe, scene and annotations");
    }

    // Mask partition and box tightness against the id map.
    const auto W = ids.width, H = ids.height;
    if (W != f.annotations.width || H != f.annotations.height) {
      add("mask", e.scene_id, "annotation size differs from the id map");
    } else {
      std::size_t covered = 0;
      std::set<std::uint16_t> seen;
      for (const auto& a : f.annotations.instances) {
        seen.insert(a.instance_id);
        std::vector<std::uint8_t> mask;
        try {
          mask = decode_rle(a.mask_rle, W, H);
        } catch (const Error& err) {
          add("mask", e.scene_id, err.what());
          continue;
        }
        Box2i box{W, H, -1, -1};
        std::size_t count = 0;
        bool agree = true;
        for (int y = 0; y < H; ++y) {
          for (int x = 0; x < W; ++x) {
            const auto k = static_cast<std::size_t>(y) * W + x;
            agree = agree && (mask[k] != 0) == (ids.ids[k] == a.instance_id);
            if (!mask[k]) continue;
            ++count;
            box = {std::min(box.xmin, x), std::min(box.ymin, y), std::max(box.xmax, x), std::max(box.ymax, y)};
          }
        }
        const auto where = e.scene_id + "#" + std::to_string(a.instance_id);
        if (!agree) add("mask", where, "mask differs from the id map");
        if (count != a.visible_pixels) add("mask", where, "visible_pixels differs from the mask");
        if (count > 0 && !(box == a.bbox2d)) add("bbox", where, "bbox2d is not tight over the mask");
        covered += count;
      }
      const auto background = static_cast<std::size_t>(std::count(ids.ids.begin(), ids.ids.end(), 0));
      if (covered + background != static_cast<std::size_t>(W) * H) {
        add("mask", e.scene_id, "instance masks and background do not partition the image");
      }
      for (auto id : ids.ids) {
        if (id != 0 && !seen.count(id)) {
          add("mask", e.scene_id, "id map holds an unannotated id " + std::to_string(id));
          break;
        }
      }
    }

    const auto it = by_scene.find(e.scene_id);
    const std::size_t have = it == by_scene.end() ? 0 : it->second.size();
    if (have != static_cast<std::size_t>(expected_queries(e.level)) || have != e.query_ids.size()) {
      add("queries", e.scene_id, "expected " + std::to_string(expected_queries(e.level)) + " queries, found " +
                                     std::to_string(have));
    }
    if (it == by_scene.end()) continue;
    const auto records = f.annotations.records();
    for (const auto* q : it->second) {
      if (q->level != r.level || (q->role == GroupRole::Distractor && !r.distractor)) {
        add("queries", q->query_id, "query level or role does not fit the recipe");
        continue;
      }
      const auto gt = brute_force_count(records, group_predicate(r.group(q->role)));
      if (static_cast<int>(gt) != q->gt_count) {
        add("gt", q->query_id, "gt_count " + std::to_string(q->gt_count) + " but recount gives " + std::to_string(gt));
      }
    }
  }
  for (const auto& [scene, qs] : by_scene) {
    if (!known.count(scene)) add("queries", scene, "queries reference a scene missing from the manifest");
  }
  if (queries.size() != m.queries || expected_total != m.queries) {
    add("queries", std::string(kQueriesName),
        "query total " + std::to_string(queries.size()) + ", manifest " + std::to_string(m.queries) + ", expected " +
            std::to_string(expected_total));
  }
  return rep;
}

nlohmann::json cmd_stats(const fs::path& root) {
  const auto m = read_manifest(root);
  const auto bank = bank_from_json(read_json(root / "bank.json"));
  const auto queries = read_queries(root);

  nlohmann::json split_sizes = nlohmann::json::object();
  std::vector<std::uint64_t> cat_freq(bank.categories.size(), 0);
  std::vector<std::uint64_t> super_freq(bank.super_categories.size(), 0);
  std::size_t max_instances = 0;
  for (const auto& e : m.scenes) {
    auto& cell = split_sizes[std::string(to_string(e.level))][std::string(to_string(e.split)) + "-" +
                                                               std::string(to_string(e.config))];
    cell = cell.is_null() ? 1 : cell.get<int>() + 1;
    max_instances = std::max(max_instances, e.instances);
    const auto recipe = recipe_from_json(read_json(root / e.dir / "scene.json").at("recipe"));
    std::set<std::uint32_t> cats{recipe.target.category.value};
    if (recipe.distractor) cats.insert(recipe.distractor->category.value);
    std::set<std::uint32_t> supers;
    for (auto c : cats) {
      ++cat_freq[c];
      supers.insert(bank.categories[c].super_category.value);
    }
    for (auto s : supers) ++super_freq[s];
  }

  nlohmann::json hist = nlohmann::json::object();
  int max_count = 0;
  for (const auto& q : queries) {
    auto& h = hist[std::string(to_string(q.level))][std::to_string(q.gt_count)];
    h = h.is_null() ? 1 : h.get<int>() + 1;
    max_count = std::max(max_count, q.gt_count);
  }
  nlohmann::json cats = nlohmann::json::object(), supers = nlohmann::json::object();
  std::uint64_t fmax = 0, fmin = 0;
  bool any = false;
  for (std::size_t c = 0; c < cat_freq.size(); ++c) {
    cats[bank.categories[c].name] = cat_freq[c];
    if (cat_freq[c] == 0) continue;
    fmax = any ? std::max(fmax, cat_freq[c]) : cat_freq[c];
    fmin = any ? std::min(fmin, cat_freq[c]) : cat_freq[c];
    any = true;
  }
  for (std::size_t s = 0; s < super_freq.size(); ++s) supers[bank.super_categories[s].name] = super_freq[s];
  return {{"scenes", m.scenes.size()},
          {"failed_scenes", m.failed.size()},
          {"queries", queries.size()},
          {"split_sizes", split_sizes},
          {"count_histogram", hist},
          {"max_count", max_count},
          {"max_instances", max_instances},
          {"category_frequency", cats},
          {"super_category_frequency", supers},
          {"category_max_min_ratio", any ? static_cast<double>(fmax) / static_cast<double>(fmin) : 0.0}};
}

Baseline baseline_from_string(std::string_view s) {
  if (s == "oracle") return Baseline::Oracle;
  if (s == "naive") return Baseline::Naive;
  if (s == "blob") return Baseline::Blob;
  throw Error("unknown baseline '" + std::string(s) + "' (expected oracle, naive or blob)");
}

std::vector<PredictionRecord> baseline_predictions(const fs::path& root, Baseline b, int jobs) {
  const auto queries = read_queries(root);
  if (b == Baseline::Oracle) return oracle_predictions(queries);
  const auto m = read_manifest(root);
  std::unordered_map<std::string, std::string> dirs;
  for (const auto& e : m.scenes) dirs[e.scene_id] = e.dir;

  std::vector<PredictionRecord> out(queries.size());
  std::vector<std::string> errors(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& q = queries[static_cast<std::size_t>(i)];
    auto& p = out[static_cast<std::size_t>(i)];
    p.query_id = q.query_id;
    try {
      const auto dir = root / dirs.at(q.scene_id);
      if (b == Baseline::Naive) {
        p.count = naive_all_objects_predictor(annotations_from_json(read_json(dir / "annotations.json")));
      } else {
        try {
          p.count = blob_match_predictor(read_ppm(dir / "rgb.ppm"), q.exemplar_boxes_positive);
        } catch (const Error&) {
          p.count = 0;
        }
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = q.query_id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(e);
  }
  return out;
}

EvalReport cmd_eval(const fs::path& root, std::span<const PredictionRecord> predictions, MissingPolicy policy) {
  return evaluate(read_queries(root), predictions, policy);
}

}  // namespace granucount
