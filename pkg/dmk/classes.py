"""Base classes for `dmk`"""

from collections import OrderedDict
import re


class NamedInstanceMetaclass(type):
    # this is just needed to implement the getitem method on NamedInstanceClass
    # to allow the syntax MyClass['instancename'] as shorthand for
    # MyClass.get_instance('instancename'); same for
    # del MyClass['instancename'] instead of MyClass.del_instance('instancename')
    def __getitem__(cls, item):
        return cls.get_instance(item)

    def __delitem__(cls, item):
        return cls.del_instance(item)

    def __contains__(cls, item):
        return item in getattr(cls, 'instances', {})


class NamedInstanceClass(object, metaclass=NamedInstanceMetaclass):
    """Base class for classes that have named instances that can be accessed
    by their name.

    Parameters
    ----------
     - name: string

    Methods
    -------
     - del_instance(name)
         Delete an instance
     - get_instance(name)
         Get an instance
     - set_description(description)
         Set the description
    """

    def __init__(self, name):
        owner = self._registry_owner()
        if 'instances' not in owner.__dict__:
            owner.instances = OrderedDict()
        owner.instances[name] = self
        self.name = name
        self.description = ''

    @classmethod
    def _registry_owner(cls):
        # subclasses of a registered class share its registry
        for c in cls.__mro__:
            if NamedInstanceClass in c.__bases__:
                return c
        return cls

    @classmethod
    def get_instance(cls, name):
        try:
            return cls.instances[name]
        except (KeyError, AttributeError):
            raise ValueError("Unknown {} '{}'; known: {}".format(
                cls.__name__, name, ', '.join(getattr(cls, 'instances', {}))))

    @classmethod
    def del_instance(cls, name):
        del cls.instances[name]

    @classmethod
    def find(cls, regex):
        """Find all instance names matching the regular expression `regex`."""
        rc = re.compile(regex)
        return list(filter(rc.search, cls.instances))

    def set_description(self, description):
        self.description = description
