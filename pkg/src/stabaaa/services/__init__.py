from .aaa import *
from .backends import *
from .barycentric import *
from .datamodel import *
from .export import *
from .interior_point import *
from .loewner import *
from .pipeline import *
from .sdp import *
from .stabaaa import *
from .stability import *
