import numpy as np

from sewkit import serialize as sz
from sewkit.generators import carpet_with_disks, circle_net, interval_net
from sewkit.sewing import sew

# 1. two-point round trip, identical bytes
two = sz.encode_space(
    __import__("sewkit").FiniteMetricSpace(np.array([[0.0, 0.1], [0.1, 0.0]])),
    name="pair",
)
text = sz.dumps(two)
back = sz.decode_space(sz.loads(text))
text2 = sz.dumps(sz.encode_space(back.space, name=back.name))
print("two-point bytes identical:", text == text2)
print("two-point dist bitwise:", np.array_equal(back.space.dist, np.array([[0.0, 0.1], [0.1, 0.0]])))

# matrix round trip on an irrational table
c = circle_net(17)
doc = sz.encode_space(c, name="c17", subsets={"odd": np.arange(1, 17, 2)})
rt = sz.decode_space(sz.loads(sz.dumps(doc)))
print("circle17 bitwise:", np.array_equal(rt.space.dist, c.dist))
print("subset kept:", np.array_equal(rt.subsets["odd"], np.arange(1, 17, 2)))
print("re-encode bytes:", sz.dumps(sz.encode_space(rt.space, name=rt.name, subsets=rt.subsets)) == sz.dumps(doc))

# euclidean form decodes to a validated space
e = sz.decode_space(sz.loads(sz.dumps(sz.encode_space(c, form="euclidean"))))
print("euclidean decode n:", e.space.n, "coords kept:", e.space.coords is not None)

# snowflake form
iv = interval_net(16)
snow_doc = sz.encode_snowflaked(sz.encode_space(iv), 0.5, name="flaked")
sdec = sz.decode_space(sz.loads(sz.dumps(snow_doc)))
print("snowflake decode bitwise:", np.array_equal(sdec.space.dist, np.sqrt(iv.dist)))

# 2. bundle round trip and invariants
bundle = carpet_with_disks(1)
bdoc = sz.encode_bundle(bundle, name="cwd1")
b2 = sz.decode_bundle(sz.loads(sz.dumps(bdoc)))
b2.validate()
print("bundle components:", len(b2.components), "base n:", b2.base.n)
print("bundle psi bitwise:", all(np.array_equal(a.psi, b.psi) for a, b in zip(bundle.components, b2.components)))
print("bundle redump identical:", sz.dumps(sz.encode_bundle(b2, name="cwd1")) == sz.dumps(bdoc))

# sewn round trip
sewn = sew(bundle)
sdoc = sz.encode_sewn(sewn, name="s1")
s2 = sz.decode_sewn(sz.loads(sz.dumps(sdoc)))
print("sewn dist bitwise:", np.array_equal(s2.space.dist, sewn.space.dist))
print("sewn q rebuilt bitwise:", np.array_equal(s2.q.q, sewn.q.q))
print("sewn certs:", s2.certificates == sewn.certificates)
print("sewn redump identical:", sz.dumps(sz.encode_sewn(s2, name="s1")) == sz.dumps(sdoc))

# digests stable and timestamp-free
r1 = sz.encode_report([], inputs={"in": sz.document_digest(sdoc)}, timestamp="2026-01-01T00:00:00")
r2 = sz.encode_report([], inputs={"in": sz.document_digest(sdoc)}, timestamp="2027-05-05T05:05:05")
print("report digest ignores timestamp:", sz.document_digest(r1) == sz.document_digest(r2))

# 3. truncated / broken documents
bad = dict(doc)
del bad["metric"]
try:
    sz.decode_space(bad)
    print("missing metric: NOT CAUGHT")
except sz.SchemaError as ex:
    print("missing metric:", ex)

try:
    sz.loads(sz.dumps(doc)[:40])
    print("truncated json: NOT CAUGHT")
except sz.SchemaError as ex:
    print("truncated json:", ex)

vdoc = dict(doc)
vdoc["format_version"] = 2
try:
    sz.decode_space(vdoc)
    print("version: NOT CAUGHT")
except sz.SchemaError as ex:
    print("version:", ex)

mdoc = sz.loads(sz.dumps(bdoc))
del mdoc["components"][0]["psi"]
try:
    sz.decode_bundle(mdoc)
    print("bundle field: NOT CAUGHT")
except sz.SchemaError as ex:
    print("bundle field:", ex)

# non-metric matrix rejected with a violation message
tri = sz.encode_space(__import__("sewkit").FiniteMetricSpace(np.array([[0.0, 1.0], [1.0, 0.0]])))
tri["points"] = 3
tri["metric"]["matrix"] = [1.0, 5.0, 1.0]
try:
    sz.decode_space(tri)
    print("triangle: NOT CAUGHT")
except ValueError as ex:
    print("triangle:", str(ex)[:90])
