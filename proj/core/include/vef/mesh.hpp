#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vef/basis.hpp"
#include "vef/dense.hpp"

namespace vef {

/// Local edge numbering: 0 = (s,0), 1 = (1,s), 2 = (s,1), 3 = (0,s), s increasing in ξ or η.
struct Face {
  std::array<int, 2> elem{-1, -1};
  std::array<int, 2> edge{-1, -1};
  /// True when elem[1]'s edge parameter runs opposite to the face parameter.
  bool flip = false;
  int tag = 0;  ///< boundary attribute, 0 for interior faces
  bool interior() const { return elem[1] >= 0; }
};

struct ElementGeometry {
  Vec2 x;     ///< physical point
  Mat2 F;     ///< columns dx/dξ, dx/dη
  double J;   ///< det F
  Mat2 Finv;
  Mat23 H;    ///< rows: (x_ξξ, x_ξη, x_ηη), (y_ξξ, y_ξη, y_ηη)
};

struct FaceGeometry {
  Vec2 x;
  Vec2 n;         ///< unit normal, elem[0] -> elem[1] (outward on the boundary)
  Vec2 tau;       ///< n rotated 90° counter-clockwise
  double weight;  ///< |dx/ds|
};

struct BoundaryTag {
  int elem;
  int edge;
  int tag;
};

/// High-order quadrilateral mesh defined by Gauss-Lobatto control points.
class Mesh {
 public:
  /// elem_nodes holds (order+1)^2 ids per element in tensor ordering i + (order+1)*j.
  /// Boundary tags default to 1 when none are given.
  Mesh(int order, std::vector<Vec2> points, std::vector<std::vector<int>> elem_nodes,
       std::vector<BoundaryTag> bdr_tags = {});

  int order() const { return order_; }
  int num_elements() const { return num_elems_; }
  int num_points() const { return static_cast<int>(points_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_interior_faces() const { return num_interior_; }
  int num_boundary_faces() const { return num_faces() - num_interior_; }
  int nodes_per_element() const { return (order_ + 1) * (order_ + 1); }

  const std::vector<Vec2>& points() const { return points_; }
  std::span<const int> element_nodes(int e) const {
    return {elem_nodes_.data() + static_cast<size_t>(e) * nodes_per_element(),
            static_cast<size_t>(nodes_per_element())};
  }
  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int f) const { return faces_[f]; }
  int element_face(int e, int edge) const { return elem_faces_[4 * e + edge]; }
  /// Position of face f among interior faces, or -1.
  int interior_index(int f) const { return interior_index_[f]; }
  /// Which side (0 or 1) element e occupies on face f.
  int face_side(int f, int e) const { return faces_[f].elem[0] == e ? 0 : 1; }

  Vec2 map(int e, const Vec2& ref) const;
  /// Throws GeometryError when J <= 0.
  ElementGeometry geometry(int e, const Vec2& ref) const;
  ElementGeometry geometry_unchecked(int e, const Vec2& ref) const;

  FaceGeometry face_geometry(int f, double s) const;
  /// Reference coordinates in the element on the given side at face parameter s.
  Vec2 face_ref(int f, int side, double s) const;
  static Vec2 edge_ref(int edge, double s);

  /// Max over elements of the largest control-point distance.
  double h() const { return h_; }
  Vec2 centroid(int e) const;
  double element_area(int e) const;
  double area() const;

  /// Control points lying on boundary edges.
  std::vector<bool> boundary_point_mask() const;
  /// Same topology, new control points (re-validated).
  Mesh with_points(std::vector<Vec2> pts) const;
  std::vector<BoundaryTag> boundary_tags() const;

  /// Throws GeometryError if det F <= 0 at any point of the degree 2m+2 rule.
  void check_tangling() const;

 private:
  void build_faces(const std::vector<BoundaryTag>& bdr_tags);
  void eval_geometry(int e, const Vec2& ref, ElementGeometry& g) const;

  int order_;
  int num_elems_;
  int num_interior_ = 0;
  std::vector<Vec2> points_;
  std::vector<int> elem_nodes_;
  std::vector<Face> faces_;
  std::vector<int> elem_faces_;
  std::vector<int> interior_index_;
  Basis1D basis_;
  double h_ = 0.0;
};

/// Orthogonal nx×ny mesh of [x0,x1]×[y0,y1]. Boundary tags: 1 bottom, 2 right, 3 top, 4 left.
Mesh build_cartesian_mesh(int nx, int ny, double x0, double x1, double y0, double y1, int order);

/// Forward-Euler advection of all control points under v = (sin X cos Y, -cos X sin Y),
/// evaluated in the frame X = frame_scale * x (frame_scale = π maps [0,1]^2 to [0,π]^2).
Mesh apply_taylor_green_distortion(const Mesh& mesh, double t_final, int n_steps,
                                   double frame_scale = 1.0);

/// x += α (sin2πx sin2πy, sin2πx sin2πy) on control points off the boundary.
Mesh apply_sine_distortion(const Mesh& mesh, double alpha);

void write_mesh(const Mesh& mesh, std::ostream& os);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh_file(const std::string& path);

}  // namespace vef
