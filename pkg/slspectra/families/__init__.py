""" Register all coefficient families """

from slspectra.families.registration import register, make_family, registered_families, FAMILY_REGISTRY
from slspectra.families.utils.checks import TWO_PI


register(id="free",                 entry_point="slspectra.families.Free.family:FreeFamily")
register(id="constant-q",           entry_point="slspectra.families.ConstantQ.family:ConstantQFamily")
register(id="example2",             entry_point="slspectra.families.Example2.family:Example2Family")
register(id="example4",             entry_point="slspectra.families.Example2.family:Example2Family", omega=TWO_PI)
register(id="example5",             entry_point="slspectra.families.Example5.family:Example5Family")
register(id="appendix-asymptotic",  entry_point="slspectra.families.AppendixAsymptotic.family:AppendixAsymptoticFamily")
