"""
The cubic model of the rotation group
=====================================

Four 3-cubes C_w, C_x, C_y, C_z stand in for SO(3). A rotation is located
by dividing its quaternion by the largest absolute coordinate; the cube
surface is carried back onto the sphere by ordinary normalization.
"""

import numpy as np

from so3atlas import ChartId, ChartPoint, Model, lift, project, so3_locate_chart
from so3atlas.cubic import describe_gluing
from so3atlas.geometry import axis_angle_rotation, quat_to_rotation, rotation_to_quat

# A quarter turn about z, as a matrix and as a quaternion
R = axis_angle_rotation([0, 0, 1], np.pi / 2)
q = rotation_to_quat(R)
print("quaternion", q)

# Its chart point: q and -q land in the same chart of the SO(3) model
p = so3_locate_chart(q)
print("chart point", p, "same for -q:", so3_locate_chart(-q) == p)

# Lifting the chart point gives back the rotation (up to sign)
print("lift", lift(p), "rotation recovered:", np.allclose(quat_to_rotation(lift(p)), R))

# The S3 model keeps the sign and has 8 charts; ties go to the positive,
# lower-index axis, so the all-halves quaternion sits at the corner of +w
print(project([0.5, 0.5, 0.5, 0.5]))
print("charts:", [c.name for c in Model.S3.charts])

# The facet gluings are derived from embeddings, not typed in by hand
for row in describe_gluing(Model.SO3)[:6]:
    print(row)

# The corner of a face is the worst-distorted place: (1,1,1) on C_w
corner = ChartPoint(ChartId(Model.SO3, 0, 0), (1.0, 1.0, 1.0))
print("corner lifts to", lift(corner))
