#pragma once

// JSON / CSV encodings of the library types. Schemas:
//   space:  {"kind":"explicit","points":[...],"d":[[...]]}
//           {"kind":"graph","n":N,"edges":[[i,j],...]}
//           {"kind":"free","rank":n,"radius":N,"margin":W}
//           {"kind":"zn","n":k,"radius":N,"margin":W}
//           {"kind":"table","elements":[...],"mul":[[...]],
//            "generators":[...],"radius":N,"margin":W}
//   kernel: {"space":<space>,"values":[[v,...],...]} with v either a real
//           number or an [re,im] pair
//   reports, embeddings, certificates: see the to_json functions below.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "coarsekit/embeddings.hpp"
#include "coarsekit/groupoid.hpp"
#include "coarsekit/roe.hpp"

namespace coarsekit::io {

using nlohmann::json;

struct LoadedSpace {
  DiscreteMetricSpace space;      // the full metric space
  std::optional<GroupBall> ball;  // present for group kinds
  json echo;                      // the parsed spec, for artifact references
};

struct LoadOptions {
  std::optional<int> margin;               // override for group kinds
  std::optional<std::size_t> max_elements;
};

LoadedSpace space_from_json(const json& j, const LoadOptions& opts = {});

struct LoadedKernel {
  Kernel kernel;
  LoadedSpace host;
};

LoadedKernel kernel_from_json(const json& j, const LoadOptions& opts = {});

struct LoadedGroupoidKernel {
  GroupoidKernel kernel;
  LoadedSpace host;
};

LoadedGroupoidKernel groupoid_kernel_from_json(const json& j,
                                               const LoadOptions& opts = {});

json kernel_to_json(const Kernel& k, const json& space_echo);
json report_to_json(const ClassificationReport& r);
json groupoid_report_to_json(const GroupoidReport& r, const GroupBall& ball);
json embedding_to_json(const HilbertEmbedding& f, const json& space_echo);
json certificate_to_json(const ExpanderCertificate& c);
json haagerup_to_json(const HaagerupCertificate& c, const GroupBall& ball);
json profile_to_json(const PropernessProfile& p);

std::string compression_csv(const CompressionProfile& p);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

struct LoadedBandOperator {
  BandOperator op;
  LoadedSpace host;
};

/// {"ball":<space>,"entries":[[s,t,[re,im]],...]}
LoadedBandOperator band_from_json(const json& j, const LoadOptions& opts = {});
json band_to_json(const BandOperator& op, const json& ball_echo);

struct LoadedCPMap {
  CPMapSpec map;
  LoadedSpace host;
};

/// {"type":"identity","ball":<space>}
/// {"type":"schur","ball":<space>,"kernel":{"values":[[...]]}}
/// {"type":"finite-rank","ball":<space>,
///  "terms":[{"functional":[[x,y,w],...],"operator":{"entries":[...]}}]}
LoadedCPMap cp_map_from_json(const json& j, const LoadOptions& opts = {});

std::uint64_t fnv1a(std::string_view bytes);
std::string digest_hex(std::string_view bytes);

json parse_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace coarsekit::io
