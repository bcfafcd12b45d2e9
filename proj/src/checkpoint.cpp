// Copyright 2026 The docmt Authors
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

#include "docmt/checkpoint.hpp"

#include "binary_io.hpp"
#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

using detail::put;
using detail::put_blob;
using detail::Reader;

const Tensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put_blob(out, ckpt.config.serialize());
  std::string meta;
  for (const auto& [k, v] : ckpt.meta) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      fail(ErrorCode::kInvalidArgument, "checkpoint metadata key/value may not contain '=' or newlines: " + k);
    meta += k + "=" + v + "\n";
  }
  put_blob(out, meta);
  put<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& [name, tensor] : ckpt.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t dim : tensor.shape()) put<std::uint64_t>(out, dim);
    for (double v : tensor.data()) put<double>(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader in(bytes, "checkpoint");
  if (in.take(kCheckpointMagic.size()) != kCheckpointMagic) fail(ErrorCode::kFormat, "not a docmt checkpoint");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    fail(ErrorCode::kFormat, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config = ModelConfig::parse(in.take(in.get<std::uint64_t>()));
  for (const auto& line : split_lines(in.take(in.get<std::uint64_t>()))) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kFormat, "bad checkpoint metadata line: " + line);
    ckpt.meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t t = 0; t < count; ++t) {
    NamedTensor nt;
    nt.name = std::string(in.take(in.get<std::uint32_t>()));
    Shape shape(in.get<std::uint32_t>());
    std::size_t n = 1;
    for (auto& dim : shape) {
      dim = static_cast<std::size_t>(in.get<std::uint64_t>());
      n *= dim;
    }
    std::vector<double> data(n);
    for (double& v : data) v = in.get<double>();
    nt.tensor = Tensor(std::move(shape), std::move(data));
    ckpt.tensors.push_back(std::move(nt));
  }
  if (!in.done()) fail(ErrorCode::kFormat, "trailing bytes after checkpoint tensor table");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto tmp = path;
  tmp += ".tmp";
  write_file(tmp, encode_checkpoint(ckpt));
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

Checkpoint model_checkpoint(const Model& model) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  for (const Parameter* p : model.params().list()) ckpt.tensors.push_back({p->name, p->value});
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Parameters params = Parameters::initialize(ckpt.config, 0);
  for (Parameter* p : params.list()) {
    const Tensor* stored = ckpt.find(p->name);
    if (stored == nullptr) fail(ErrorCode::kFormat, "checkpoint lacks tensor " + p->name);
    if (stored->shape() != p->value.shape())
      fail(ErrorCode::kFormat, "checkpoint tensor " + p->name + " has shape " + shape_string(stored->shape()) +
                                   ", expected " + shape_string(p->value.shape()));
    p->value = *stored;
  }
  return Model(ckpt.config, std::move(params));
}

}  // namespace docmt
