#include "stg/laplacian_io.hpp"

#include "stg/csv.hpp"
#include "stg/error.hpp"

namespace stg {

void write_laplacian_csv(const std::filesystem::path& path, const GraphLaplacian& laplacian,
                         const std::vector<std::string>& node_ids) {
  const std::size_t n = laplacian.n_nodes();
  if (!node_ids.empty() && node_ids.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "node id count does not match Laplacian size");
  }
  auto id = [&](std::size_t i) { return node_ids.empty() ? std::to_string(i) : node_ids[i]; };
  std::vector<csv::Row> rows;
  csv::Row header{"node"};
  for (std::size_t i = 0; i < n; ++i) header.push_back(id(i));
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < n; ++i) {
    csv::Row row{id(i)};
    for (std::size_t j = 0; j < n; ++j)
      row.push_back(csv::format_double(
          laplacian.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    rows.push_back(std::move(row));
  }
  csv::write_rows(path, rows);
}

GraphLaplacian read_laplacian_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* node_ids) {
  const auto rows = csv::read_rows(path);
  if (rows.empty() || rows[0].empty() || csv::trim(rows[0][0]) != "node") {
    throw Error(ErrorCode::parse, path.string() + ": missing 'node' header");
  }
  const std::size_t n = rows[0].size() - 1;
  if (rows.size() != n + 1) {
    throw Error(ErrorCode::parse, path.string() + ": expected " + std::to_string(n) + " matrix rows");
  }
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i + 1].size() != n + 1) {
      throw Error(ErrorCode::parse, path.string() + ": row " + std::to_string(i) + " has wrong width");
    }
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = csv::parse_double(rows[i + 1][j + 1]);
  }
  if (node_ids) {
    node_ids->assign(rows[0].begin() + 1, rows[0].end());
  }
  return GraphLaplacian::from_matrix(std::move(m));
}

void write_edge_list_csv(const std::filesystem::path& path, const EdgeWeightVector& w) {
  std::vector<csv::Row> rows{{"i", "j", "weight"}};
  const auto pairs = edge_pairs(w.n_nodes());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    rows.push_back({std::to_string(pairs[k].first), std::to_string(pairs[k].second),
                    csv::format_double(w[k])});
  }
  csv::write_rows(path, rows);
}

EdgeWeightVector read_edge_list_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path);
  if (rows.empty() || rows[0].size() != 3 || csv::trim(rows[0][0]) != "i") {
    throw Error(ErrorCode::parse, path.string() + ": missing 'i,j,weight' header");
  }
  std::size_t n = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw Error(ErrorCode::parse, path.string() + ": malformed edge row");
    n = std::max<std::size_t>(n, static_cast<std::size_t>(csv::parse_int(rows[r][1])) + 1);
  }
  Vector w = Vector::Zero(static_cast<Eigen::Index>(edge_count(n)));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const long long i = csv::parse_int(rows[r][0]);
    const long long j = csv::parse_int(rows[r][1]);
    if (i < 0 || i >= j) throw Error(ErrorCode::parse, path.string() + ": edge rows need 0 <= i < j");
    w[static_cast<Eigen::Index>(edge_index(n, static_cast<std::size_t>(i), static_cast<std::size_t>(j)))] =
        csv::parse_double(rows[r][2]);
  }
  return EdgeWeightVector(n, std::move(w));
}

}  // namespace stg
